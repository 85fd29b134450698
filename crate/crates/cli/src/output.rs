//! Trajectory CSV and SVG plots.

use std::fmt::Write as _;
use std::io::Write;

use satstab_core::certify::BasinEstimate;
use satstab_core::hybrid_sim::HybridTrajectory;
use satstab_core::symmat::sym_eig;

/// Segments of the basin ellipse polyline.
pub const ELLIPSE_SEGMENTS: usize = 128;
/// Trajectory polylines are thinned to at most this many points.
const MAX_POLYLINE: usize = 4000;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const PAD: f64 = 40.0;
const COLORS: [&str; 8] = [
    "#000000", "#d62728", "#2ca02c", "#ff00ff", "#ff7f0e", "#1f77b4", "#8c564b", "#7f7f7f",
];

/// `t, j, xp_1..n, etat_1..n, tau_1..q, V, u_1..m`.
pub fn csv_header(n: usize, q: usize, m: usize) -> Vec<String> {
    let mut h = vec!["t".to_string(), "j".to_string()];
    h.extend((1..=n).map(|i| format!("xp_{i}")));
    h.extend((1..=n).map(|i| format!("etat_{i}")));
    h.extend((1..=q).map(|i| format!("tau_{i}")));
    h.push("V".into());
    h.extend((1..=m).map(|i| format!("u_{i}")));
    h
}

/// Writes every sample, including both sides of each jump.
pub fn write_trajectory_csv<W: Write>(traj: &HybridTrajectory<f64>, out: W) -> csv::Result<()> {
    let first = &traj.samples[0];
    let (n, q, m) = (first.state.xp.len(), first.state.tau.len(), first.u.len());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header(n, q, m))?;
    let mut row = Vec::with_capacity(2 + 2 * n + q + 1 + m);
    for s in &traj.samples {
        row.clear();
        row.push(s.t.to_string());
        row.push(s.j.to_string());
        let st = &s.state;
        row.extend(st.xp.iter().chain(&st.eta_tilde).chain(&st.tau).map(f64::to_string));
        row.push(s.v.to_string());
        row.extend(s.u.iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Boundary of `{x : xᵀ N x = μ̄}` for a 2×2 `N`, as `segments + 1` points
/// (the last repeats the first).
pub fn ellipse_points(basin: &BasinEstimate<f64>, segments: usize) -> Vec<(f64, f64)> {
    let eig = sym_eig(&basin.n);
    let v = &eig.vectors;
    let r: Vec<f64> = eig.values.iter().map(|&l| (basin.mu_bar / l).sqrt()).collect();
    (0..=segments)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * (k % segments) as f64 / segments as f64;
            let (a, b) = (r[0] * th.cos(), r[1] * th.sin());
            (v.row(0)[0] * a + v.row(0)[1] * b, v.row(1)[0] * a + v.row(1)[1] * b)
        })
        .collect()
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit(points: impl Iterator<Item = (f64, f64)>) -> Self {
        let mut f = Frame {
            x0: f64::INFINITY,
            x1: f64::NEG_INFINITY,
            y0: f64::INFINITY,
            y1: f64::NEG_INFINITY,
        };
        for (x, y) in points.filter(|(x, y)| x.is_finite() && y.is_finite()) {
            f.x0 = f.x0.min(x);
            f.x1 = f.x1.max(x);
            f.y0 = f.y0.min(y);
            f.y1 = f.y1.max(y);
        }
        if !f.x0.is_finite() {
            (f.x0, f.x1, f.y0, f.y1) = (-1.0, 1.0, -1.0, 1.0);
        }
        let grow = |lo: &mut f64, hi: &mut f64| {
            let span = (*hi - *lo).max(1e-9);
            *lo -= 0.05 * span;
            *hi += 0.05 * span;
        };
        grow(&mut f.x0, &mut f.x1);
        grow(&mut f.y0, &mut f.y1);
        f
    }

    fn map(&self, (x, y): (f64, f64)) -> (f64, f64) {
        let px = PAD + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * PAD);
        let py = HEIGHT - PAD - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * PAD);
        (px, py)
    }
}

fn polyline(svg: &mut String, frame: &Frame, pts: &[(f64, f64)], color: &str, extra: &str) {
    let step = pts.len().div_ceil(MAX_POLYLINE).max(1);
    let mut coords = String::new();
    let last = pts.len().saturating_sub(1);
    for (i, &p) in pts.iter().enumerate() {
        if i % step != 0 && i != last {
            continue;
        }
        let (x, y) = frame.map(p);
        let _ = write!(coords, "{x:.2},{y:.2} ");
    }
    let _ = writeln!(
        svg,
        r#"<polyline fill="none" stroke="{color}" stroke-width="1.2"{extra} points="{}"/>"#,
        coords.trim_end()
    );
}

fn header(svg: &mut String, frame: &Frame, xlabel: &str, ylabel: &str) {
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (l, b) = (PAD, HEIGHT - PAD);
    let (r, t) = (WIDTH - PAD, PAD);
    let _ = writeln!(
        svg,
        r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="gray"/>"#,
        r - l,
        b - t
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{xlabel} [{:.3}, {:.3}]</text>"#,
        WIDTH / 2.0,
        HEIGHT - 10.0,
        frame.x0,
        frame.x1
    );
    let _ = writeln!(
        svg,
        r#"<text x="12" y="{}" font-size="12" text-anchor="middle" transform="rotate(-90 12 {})">{ylabel} [{:.3}, {:.3}]</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        frame.y0,
        frame.y1
    );
}

/// Phase plane `x_p1` vs `x_p2` with the basin ellipse when `n = 2`,
/// otherwise the applied inputs over time with the saturation levels.
pub fn render_plot(
    trajectories: &[HybridTrajectory<f64>],
    basin: Option<&BasinEstimate<f64>>,
    n: usize,
    ubar: &[f64],
) -> Result<String, String> {
    for (k, tr) in trajectories.iter().enumerate() {
        let s = &tr.samples[0];
        if s.state.xp.len() != n || s.u.len() != ubar.len() {
            return Err(format!("trajectory {k} does not match the plant dimensions"));
        }
    }
    if let Some(b) = basin {
        if b.n.dim() != n {
            return Err(format!("basin is {}-dimensional, plant has n = {n}", b.n.dim()));
        }
    }
    Ok(if n == 2 {
        phase_plane(trajectories, basin)
    } else {
        time_series(trajectories, ubar)
    })
}

fn phase_plane(trajectories: &[HybridTrajectory<f64>], basin: Option<&BasinEstimate<f64>>) -> String {
    let ellipse = basin.map(|b| ellipse_points(b, ELLIPSE_SEGMENTS)).unwrap_or_default();
    let paths: Vec<Vec<(f64, f64)>> = trajectories
        .iter()
        .map(|tr| tr.samples.iter().map(|s| (s.state.xp[0], s.state.xp[1])).collect())
        .collect();
    let frame = Frame::fit(ellipse.iter().copied().chain(paths.iter().flatten().copied()));
    let mut svg = String::new();
    header(&mut svg, &frame, "xp_1", "xp_2");
    if !ellipse.is_empty() {
        polyline(&mut svg, &frame, &ellipse, "#1f77b4", r#" stroke-dasharray="none" class="basin""#);
    }
    for (k, p) in paths.iter().enumerate() {
        polyline(&mut svg, &frame, p, COLORS[k % COLORS.len()], r#" class="trajectory""#);
    }
    svg.push_str("</svg>\n");
    svg
}

fn time_series(trajectories: &[HybridTrajectory<f64>], ubar: &[f64]) -> String {
    let umax = ubar.iter().copied().fold(0.0, f64::max);
    let t_end = trajectories
        .iter()
        .map(|tr| tr.last().t)
        .fold(0.0, f64::max)
        .max(1e-9);
    let series: Vec<Vec<(f64, f64)>> = trajectories
        .iter()
        .flat_map(|tr| (0..ubar.len()).map(move |i| tr.samples.iter().map(|s| (s.t, s.u[i])).collect()))
        .collect();
    let bounds = [(0.0, -umax), (t_end, umax)];
    let frame = Frame::fit(bounds.into_iter().chain(series.iter().flatten().copied()));
    let mut svg = String::new();
    header(&mut svg, &frame, "t", "u");
    for &u in ubar {
        for level in [u, -u] {
            polyline(&mut svg, &frame, &[(0.0, level), (t_end, level)], "#999999", r#" stroke-dasharray="4 3" class="bound""#);
        }
    }
    for (k, s) in series.iter().enumerate() {
        polyline(&mut svg, &frame, s, COLORS[k % COLORS.len()], r#" class="input""#);
    }
    svg.push_str("</svg>\n");
    svg
}
