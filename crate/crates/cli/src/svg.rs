//! Minimal hand-rolled SVG plots: enough for the sweep and verification
//! figures without a plotting dependency.

use scorepath_core::analysis::{ConePair, ImplicitCurve};
use scorepath_core::experiments::SweepResult;
use scorepath_core::kinematics::Event;
use scorepath_core::verify::{ConditionReport, PartialField};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 48.0;

const PALETTE: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];

/// A single-panel plot with a fixed data range mapped to pixel space.
struct Panel {
    buf: String,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    px0: f64,
    py0: f64,
    pw: f64,
    ph: f64,
}

impl Panel {
    #[allow(clippy::too_many_arguments)]
    fn new(x0: f64, x1: f64, y0: f64, y1: f64, px0: f64, py0: f64, pw: f64, ph: f64) -> Self {
        Panel { buf: String::new(), x0, x1, y0, y1, px0, py0, pw, ph }
    }

    fn px(&self, x: f64) -> f64 {
        self.px0 + (x - self.x0) / (self.x1 - self.x0) * self.pw
    }

    fn py(&self, y: f64) -> f64 {
        // SVG y grows downward.
        self.py0 + self.ph - (y - self.y0) / (self.y1 - self.y0) * self.ph
    }

    fn frame(&mut self, title: &str, xlabel: &str, ylabel: &str) {
        self.buf.push_str(&format!(
            "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"#333\"/>\n",
            self.px0, self.py0, self.pw, self.ph
        ));
        self.buf.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"14\" text-anchor=\"middle\">{title}</text>\n",
            self.px0 + self.pw / 2.0,
            self.py0 - 8.0
        ));
        self.buf.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">{xlabel}</text>\n",
            self.px0 + self.pw / 2.0,
            self.py0 + self.ph + 28.0
        ));
        self.buf.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 {0:.1} {1:.1})\">{ylabel}</text>\n",
            self.px0 - 30.0,
            self.py0 + self.ph / 2.0
        ));
    }

    fn polyline(&mut self, pts: impl Iterator<Item = (f64, f64)>, stroke: &str, dash: Option<&str>) {
        let mut attr = String::new();
        if let Some(d) = dash {
            attr = format!(" stroke-dasharray=\"{d}\"");
        }
        let coords: Vec<String> = pts
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y)))
            .collect();
        if coords.len() < 2 {
            return;
        }
        self.buf.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"1.2\"{attr}/>\n",
            coords.join(" ")
        ));
    }

    fn segment(&mut self, a: (f64, f64), b: (f64, f64), stroke: &str, width: f64) {
        self.buf.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{stroke}\" stroke-width=\"{width}\"/>\n",
            self.px(a.0),
            self.py(a.1),
            self.px(b.0),
            self.py(b.1)
        ));
    }

    fn cross(&mut self, x: f64, y: f64, stroke: &str) {
        let (cx, cy) = (self.px(x), self.py(y));
        self.buf.push_str(&format!(
            "<path d=\"M{:.2} {:.2} L{:.2} {:.2} M{:.2} {:.2} L{:.2} {:.2}\" stroke=\"{stroke}\" stroke-width=\"2\"/>\n",
            cx - 5.0, cy - 5.0, cx + 5.0, cy + 5.0, cx - 5.0, cy + 5.0, cx + 5.0, cy - 5.0
        ));
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        let (px, py) = (self.px(x), self.py(y + h));
        self.buf.push_str(&format!(
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{fill}\"/>\n",
            px,
            py,
            self.pw * w / (self.x1 - self.x0),
            self.ph * h / (self.y1 - self.y0)
        ));
    }
}

fn document(width: f64, height: f64, body: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{body}</svg>\n"
    )
}

fn ratio_color(result: &SweepResult, ratio: f64) -> &'static str {
    let idx = result
        .summaries
        .iter()
        .map(|s| s.ratio)
        .chain(result.runs.iter().map(|r| r.ratio))
        .collect::<Vec<_>>();
    let mut distinct: Vec<f64> = Vec::new();
    for r in idx {
        if !distinct.contains(&r) {
            distinct.push(r);
        }
    }
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = distinct.iter().position(|&r| r == ratio).unwrap_or(0);
    PALETTE[k % PALETTE.len()]
}

/// State-space plot (theta vs d): one polyline per trajectory, crash
/// markers, and optionally the invariant-cone lines and the zero curve.
pub fn state_space(
    result: &SweepResult,
    overlay: Option<(&ConePair, &ImplicitCurve)>,
    d_star: f64,
) -> String {
    let mut p = Panel::new(
        -1.6,
        1.6,
        -d_star,
        d_star,
        MARGIN,
        MARGIN,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN,
    );
    p.frame("state space", "theta (rad)", "d (m)");
    if let Some((cones, curve)) = overlay {
        for l in [cones.l_inner, cones.l_outer] {
            // Cone boundary d = -l theta, clipped to the d range.
            let t_max = (d_star / l).min(1.6);
            p.segment((-t_max, l * t_max), (t_max, -l * t_max), "#999999", 1.0);
        }
        p.polyline(
            curve
                .theta_samples
                .iter()
                .zip(&curve.d_values)
                .map(|(&t, &d)| (t, d)),
            "#000000",
            Some("6 3"),
        );
    }
    for run in &result.runs {
        let Some(traj) = &run.trajectory else { continue };
        let color = ratio_color(result, run.ratio);
        p.polyline(
            traj.samples.iter().map(|s| (s.state.theta, s.state.d)),
            color,
            None,
        );
        if traj.event == Event::Crashed {
            if let Some(last) = traj.samples.last() {
                p.cross(last.state.theta.clamp(-1.6, 1.6), last.state.d.clamp(-d_star, d_star), "#d62728");
            }
        }
    }
    document(WIDTH, HEIGHT, &p.buf)
}

/// Top-down corridor plot (s vs d) with wall lines and crash markers.
pub fn topdown(result: &SweepResult, w_half: f64) -> String {
    let s_max = result
        .runs
        .iter()
        .filter_map(|r| r.trajectory.as_ref())
        .flat_map(|t| t.samples.iter().map(|s| s.state.s))
        .fold(1.0_f64, f64::max);
    let mut p = Panel::new(
        0.0,
        s_max * 1.02,
        -w_half * 1.1,
        w_half * 1.1,
        MARGIN,
        MARGIN,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN,
    );
    p.frame("corridor top-down", "s (m)", "d (m)");
    for wall in [-w_half, w_half] {
        p.segment((0.0, wall), (s_max * 1.02, wall), "#444444", 2.0);
    }
    for run in &result.runs {
        let Some(traj) = &run.trajectory else { continue };
        let color = ratio_color(result, run.ratio);
        p.polyline(traj.samples.iter().map(|s| (s.state.s, s.state.d)), color, None);
        if traj.event == Event::Crashed {
            if let Some(last) = traj.samples.last() {
                p.cross(last.state.s, last.state.d.clamp(-w_half, w_half), "#d62728");
            }
        }
    }
    document(WIDTH, HEIGHT, &p.buf)
}

fn heat_color(value: f64, scale: f64) -> String {
    // Blue for negative, red for positive, white near zero.
    let u = (value / scale).clamp(-1.0, 1.0);
    let (r, g, b) = if u < 0.0 {
        let w = 1.0 + u;
        (255.0 * w, 255.0 * w, 255.0)
    } else {
        let w = 1.0 - u;
        (255.0, 255.0 * w, 255.0 * w)
    };
    format!("rgb({:.0},{:.0},{:.0})", r, g, b)
}

/// Two-panel heatmap of the partial-derivative fields with the verified
/// region outlined on each.
pub fn partials_heatmap(field: &PartialField, report: &ConditionReport) -> String {
    let grid = &field.grid;
    let panel_w = (WIDTH - 3.0 * MARGIN) / 2.0;
    let mut body = String::new();
    for (panel_idx, (values, title)) in
        [(&field.df_dtheta, "dF/dtheta"), (&field.df_dd, "dF/dd")].iter().enumerate()
    {
        let scale = values
            .iter()
            .filter(|v| v.is_finite())
            .fold(0.0_f64, |m, v| m.max(v.abs()))
            .max(1e-12);
        let mut p = Panel::new(
            grid.theta_min,
            grid.theta_max,
            grid.d_min,
            grid.d_max,
            MARGIN + panel_idx as f64 * (panel_w + MARGIN),
            MARGIN,
            panel_w,
            HEIGHT - 2.0 * MARGIN,
        );
        let (ht, hd) = (grid.h_theta(), grid.h_d());
        for i in 0..grid.n_theta {
            for j in 0..grid.n_d {
                let v = values[grid.index(i, j)];
                if !v.is_finite() {
                    continue;
                }
                p.rect(
                    grid.theta_at(i) - ht / 2.0,
                    grid.d_at(j) - hd / 2.0,
                    ht,
                    hd,
                    &heat_color(v, scale),
                );
            }
        }
        for seg in &report.contour {
            p.segment(seg[0], seg[1], "#800000", 1.5);
        }
        p.frame(title, "theta (rad)", "d (m)");
        body.push_str(&p.buf);
    }
    document(WIDTH, HEIGHT, &body)
}
