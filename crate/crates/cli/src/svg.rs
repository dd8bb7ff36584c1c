//! Minimal deterministic SVG phase portraits.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Portrait {
    pub title: String,
    pub axis_labels: [String; 2],
    pub view: [[f64; 2]; 2],
    pub rest: Option<[f64; 2]>,
    pub curves: Vec<Vec<[f64; 2]>>,
}

/// Bounding box of the finite points, always containing the origin, padded
/// by 5% and capped at `cap` per axis.
pub fn auto_view(
    curves: &[Vec<[f64; 2]>],
    extra: &[[f64; 2]],
    cap: Option<[f64; 2]>,
) -> [[f64; 2]; 2] {
    let mut lo = [0.0f64; 2];
    let mut hi = [0.0f64; 2];
    for p in curves.iter().flatten().chain(extra) {
        for k in 0..2 {
            let v = match cap {
                Some(c) => p[k].min(c[k]),
                None => p[k],
            };
            if v.is_finite() {
                lo[k] = lo[k].min(v);
                hi[k] = hi[k].max(v);
            }
        }
    }
    let mut view = [[0.0; 2]; 2];
    for k in 0..2 {
        let span = if hi[k] > lo[k] { hi[k] - lo[k] } else { 1.0 };
        view[k] = [lo[k] - 0.05 * span, hi[k] + 0.05 * span];
    }
    view
}

/// Liang-Barsky: the part of segment `p -> q` inside `view`, as parameters.
fn clip(p: [f64; 2], q: [f64; 2], view: &[[f64; 2]; 2]) -> Option<(f64, f64)> {
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for k in 0..2 {
        let d = q[k] - p[k];
        for (num, den) in [(p[k] - view[k][0], -d), (view[k][1] - p[k], d)] {
            if den == 0.0 {
                if num < 0.0 {
                    return None;
                }
            } else {
                let r = num / den;
                if den < 0.0 {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
            }
        }
    }
    (t0 <= t1).then_some((t0, t1))
}

/// Split a polyline into the runs visible inside `view`.
pub fn clip_polyline(points: &[[f64; 2]], view: &[[f64; 2]; 2]) -> Vec<Vec<[f64; 2]>> {
    let lerp =
        |p: [f64; 2], q: [f64; 2], t: f64| [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])];
    let mut runs: Vec<Vec<[f64; 2]>> = Vec::new();
    let mut current: Vec<[f64; 2]> = Vec::new();
    for w in points.windows(2) {
        let (p, q) = (w[0], w[1]);
        if !(p.iter().chain(&q).all(|v| v.is_finite())) {
            runs.extend((current.len() > 1).then(|| std::mem::take(&mut current)));
            current.clear();
            continue;
        }
        match clip(p, q, view) {
            Some((t0, t1)) => {
                let a = lerp(p, q, t0);
                if t0 > 0.0 || current.is_empty() {
                    if current.len() > 1 {
                        runs.push(std::mem::take(&mut current));
                    }
                    current = vec![a];
                }
                current.push(lerp(p, q, t1));
                if t1 < 1.0 {
                    runs.push(std::mem::take(&mut current));
                }
            }
            None => {
                if current.len() > 1 {
                    runs.push(std::mem::take(&mut current));
                }
                current.clear();
            }
        }
    }
    if current.len() > 1 {
        runs.push(current);
    }
    runs
}

fn tick_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let m = raw / mag;
    let nice = if m < 1.5 {
        1.0
    } else if m < 3.5 {
        2.0
    } else if m < 7.5 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn tick_label(v: f64, step: f64) -> String {
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let s = format!("{v:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

pub fn render(p: &Portrait) -> String {
    let [vx, vy] = p.view;
    let sx = |x: f64| MARGIN + (x - vx[0]) / (vx[1] - vx[0]) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - vy[0]) / (vy[1] - vy[0]) * (HEIGHT - 2.0 * MARGIN);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"##
    );
    let _ = writeln!(
        s,
        r##"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"##
    );
    let _ = writeln!(
        s,
        r##"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"##,
        WIDTH / 2.0,
        escape(&p.title)
    );

    // frame and ticks
    let (x0, x1, y0, y1) = (sx(vx[0]), sx(vx[1]), sy(vy[0]), sy(vy[1]));
    let _ = writeln!(
        s,
        r##"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#999" stroke-width="1"/>"##,
        x1 - x0,
        y0 - y1
    );
    let _ = writeln!(
        s,
        r##"<g font-family="sans-serif" font-size="11" fill="#333">"##
    );
    for (k, range) in [vx, vy].iter().enumerate() {
        let step = tick_step(range[1] - range[0]);
        let mut v = (range[0] / step).ceil() * step;
        while v <= range[1] + 1e-9 * step {
            if k == 0 {
                let _ = writeln!(
                    s,
                    r##"<line x1="{0:.2}" y1="{y0:.2}" x2="{0:.2}" y2="{1:.2}" stroke="#999"/>"##,
                    sx(v),
                    y0 + 4.0
                );
                let _ = writeln!(
                    s,
                    r##"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
                    sx(v),
                    y0 + 16.0,
                    tick_label(v, step)
                );
            } else {
                let _ = writeln!(
                    s,
                    r##"<line x1="{0:.2}" y1="{1:.2}" x2="{x0:.2}" y2="{1:.2}" stroke="#999"/>"##,
                    x0 - 4.0,
                    sy(v)
                );
                let _ = writeln!(
                    s,
                    r##"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
                    x0 - 6.0,
                    sy(v) + 4.0,
                    tick_label(v, step)
                );
            }
            v += step;
        }
    }
    let _ = writeln!(
        s,
        r##"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
        (x0 + x1) / 2.0,
        HEIGHT - 14.0,
        escape(&p.axis_labels[0])
    );
    let _ = writeln!(
        s,
        r##"<text x="16" y="{0:.2}" text-anchor="middle" transform="rotate(-90 16 {0:.2})">{1}</text>"##,
        (y0 + y1) / 2.0,
        escape(&p.axis_labels[1])
    );
    let _ = writeln!(s, "</g>");

    // coordinate axes through the origin
    if vy[0] <= 0.0 && 0.0 <= vy[1] {
        let _ = writeln!(
            s,
            r##"<line x1="{x0:.2}" y1="{0:.2}" x2="{x1:.2}" y2="{0:.2}" stroke="black" stroke-width="1.2"/>"##,
            sy(0.0)
        );
    }
    if vx[0] <= 0.0 && 0.0 <= vx[1] {
        let _ = writeln!(
            s,
            r##"<line x1="{0:.2}" y1="{y0:.2}" x2="{0:.2}" y2="{y1:.2}" stroke="black" stroke-width="1.2"/>"##,
            sx(0.0)
        );
    }

    for (i, curve) in p.curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            s,
            r##"<g class="trajectory" id="trajectory-{i}" fill="none" stroke="{color}" stroke-width="1.5">"##
        );
        for run in clip_polyline(curve, &p.view) {
            let pts: Vec<String> = run
                .iter()
                .map(|q| format!("{:.2},{:.2}", sx(q[0]), sy(q[1])))
                .collect();
            let _ = writeln!(s, r##"<polyline points="{}"/>"##, pts.join(" "));
        }
        let _ = writeln!(s, "</g>");
    }

    if let Some(r) = p.rest {
        if (vx[0]..=vx[1]).contains(&r[0]) && (vy[0]..=vy[1]).contains(&r[1]) {
            let _ = writeln!(
                s,
                r##"<circle class="rest-point" cx="{:.2}" cy="{:.2}" r="4" fill="black"/>"##,
                sx(r[0]),
                sy(r[1])
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    const UNIT: [[f64; 2]; 2] = [[0.0, 1.0], [0.0, 1.0]];

    #[test]
    fn clip_inside_and_crossing() {
        assert_eq!(clip([0.2, 0.2], [0.8, 0.8], &UNIT), Some((0.0, 1.0)));
        let (t0, t1) = clip([-1.0, 0.5], [2.0, 0.5], &UNIT).unwrap();
        assert!((t0 - 1.0 / 3.0).abs() < 1e-15 && (t1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(clip([2.0, 2.0], [3.0, 3.0], &UNIT), None);
    }

    #[test]
    fn polyline_split_by_excursion() {
        let pts = [[0.1, 0.5], [0.5, 0.5], [0.5, 2.0], [0.6, 0.5], [0.9, 0.5]];
        let runs = clip_polyline(&pts, &UNIT);
        assert_eq!(runs.len(), 2);
        assert_eq!(runs[0][0], [0.1, 0.5]);
        assert_eq!(runs[0].last().unwrap()[1], 1.0);
        assert_eq!(runs[1].last().unwrap(), &[0.9, 0.5]);
    }

    #[test]
    fn view_contains_origin_and_respects_cap() {
        let v = auto_view(&[vec![[1.0, 2.0], [3.0, 1e9]]], &[], Some([10.0, 10.0]));
        assert!(v[0][0] < 0.0 && v[1][0] < 0.0);
        assert!(v[1][1] <= 10.5);
    }

    #[test]
    fn render_is_deterministic() {
        let p = Portrait {
            title: "t".into(),
            axis_labels: ["x".into(), "y".into()],
            view: [[0.0, 4.0], [0.0, 6.0]],
            rest: Some([2.0, 3.0]),
            curves: vec![vec![[1.0, 1.0], [3.0, 5.0]]],
        };
        let a = render(&p);
        assert_eq!(a, render(&p));
        assert_eq!(a.matches("<polyline").count(), 1);
        assert!(a.contains("rest-point"));
    }

    #[test]
    fn ticks_are_round() {
        assert_eq!(tick_step(10.0), 2.0);
        assert_eq!(tick_step(0.7), 0.1);
        assert_eq!(tick_label(-0.0, 0.5), "0.0");
    }
}
