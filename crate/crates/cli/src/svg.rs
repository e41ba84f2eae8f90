//! Self-contained SVG plots of the scan tables.

use std::fmt::Write;

use spinchain::scans::{ScanTable, Value};

use crate::output::Report;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 130.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Linear map from a data range onto the plotting frame.
struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let widen = |(a, b): (f64, f64)| if b > a { (a, b) } else { (a - 0.5, b + 0.5) };
        Frame { x: widen(x), y: widen(y) }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn range(values: impl IntoIterator<Item = f64>) -> Option<(f64, f64)> {
    values
        .into_iter()
        .filter(|v| v.is_finite())
        .fold(None, |acc, v| Some(acc.map_or((v, v), |(lo, hi): (f64, f64)| (lo.min(v), hi.max(v)))))
}

fn pad((lo, hi): (f64, f64), fraction: f64) -> (f64, f64) {
    let margin = (hi - lo).abs().max(1e-12) * fraction;
    (lo - margin, hi + margin)
}

/// Roughly five round-numbered ticks covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let magnitude = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * magnitude).find(|s| *s >= raw).unwrap_or(10.0 * magnitude);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    let text = format!("{:.3}", v);
    let text = text.trim_end_matches('0').trim_end_matches('.');
    if text == "-0" {
        "0".to_string()
    } else {
        text.to_string()
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn open(svg: &mut String, title: &str) {
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn axes(svg: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        svg,
        r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    for t in ticks(frame.x.0, frame.x.1) {
        let x = frame.px(t);
        let _ = writeln!(svg, r#"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(svg, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#, y0 + 18.0, tick_label(t));
    }
    for t in ticks(frame.y.0, frame.y.1) {
        let y = frame.py(t);
        let _ = writeln!(svg, r#"<line x1="{}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="black"/>"#, x0 - 5.0);
        let _ =
            writeln!(svg, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 8.0, y + 4.0, tick_label(t));
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 18.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn polyline(svg: &mut String, frame: &Frame, points: &[(f64, f64)], color: &str, dash: Option<&str>) {
    let coords: Vec<String> = points
        .iter()
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
        .collect();
    if coords.len() < 2 {
        return;
    }
    let dash = dash.map(|d| format!(r#" stroke-dasharray="{d}""#)).unwrap_or_default();
    let _ = writeln!(
        svg,
        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#,
        coords.join(" ")
    );
}

fn markers(svg: &mut String, frame: &Frame, points: &[(f64, f64)], color: &str) {
    for &(x, y) in points.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
        let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="{color}"/>"#, frame.px(x), frame.py(y));
    }
}

fn legend(svg: &mut String, entries: &[(String, String, Option<&str>)]) {
    let x = WIDTH - RIGHT + 12.0;
    for (k, (label, color, dash)) in entries.iter().enumerate() {
        let y = TOP + 12.0 + 18.0 * k as f64;
        let dash = dash.map(|d| format!(r#" stroke-dasharray="{d}""#)).unwrap_or_default();
        let _ = writeln!(
            svg,
            r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="2"{dash}/>"#,
            x + 20.0
        );
        let _ = writeln!(svg, r#"<text x="{}" y="{}">{}</text>"#, x + 26.0, y + 4.0, escape(label));
    }
}

fn spin_tc(table: &ScanTable) -> String {
    let s = table.column("s");
    let t_c = table.column("t_c");
    let points: Vec<(f64, f64)> = s.iter().copied().zip(t_c.iter().copied()).collect();
    let mut svg = String::new();
    open(&mut svg, "characteristic temperature of the two-site ring");
    let Some(xr) = range(s.iter().copied()) else { return close(svg) };
    let yr = range(t_c.iter().copied()).unwrap_or((0.0, 1.0));
    let frame = Frame::new(pad(xr, 0.08), pad((0.0f64.min(yr.0), yr.1), 0.08));
    axes(&mut svg, &frame, "s", "T_c / J");
    let mut entries = vec![("T_c".to_string(), PALETTE[0].to_string(), None)];
    if let (Some(slope), Some(intercept)) = (diag(table, "fit_slope"), diag(table, "fit_intercept")) {
        let fit = [(xr.0, slope * xr.0 + intercept), (xr.1, slope * xr.1 + intercept)];
        polyline(&mut svg, &frame, &fit, PALETTE[1], Some("6,4"));
        entries.push(("linear fit".to_string(), PALETTE[1].to_string(), Some("6,4")));
    }
    markers(&mut svg, &frame, &points, PALETTE[0]);
    legend(&mut svg, &entries);
    close(svg)
}

fn diag(table: &ScanTable, name: &str) -> Option<f64> {
    table.diagnostic(name).and_then(Value::as_f64)
}

fn length_tc(table: &ScanTable) -> String {
    let sites = table.column("sites");
    let t_c = table.column("t_c");
    let spins: Vec<String> = match table.column_index("s") {
        Some(k) => table.rows.iter().map(|r| r[k].to_string()).collect(),
        None => vec![String::new(); table.rows.len()],
    };
    let mut svg = String::new();
    open(&mut svg, "characteristic temperature against ring length");
    let Some(xr) = range(sites.iter().copied()) else { return close(svg) };
    let yr = range(t_c.iter().copied()).unwrap_or((0.0, 1.0));
    let frame = Frame::new(pad(xr, 0.05), pad((0.0f64.min(yr.0), yr.1), 0.08));
    axes(&mut svg, &frame, "L", "T_c / J");
    let mut order: Vec<&String> = Vec::new();
    for s in &spins {
        if !order.contains(&s) {
            order.push(s);
        }
    }
    let mut entries = Vec::new();
    for (k, s) in order.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let points: Vec<(f64, f64)> =
            (0..sites.len()).filter(|&i| &spins[i] == *s && t_c[i].is_finite()).map(|i| (sites[i], t_c[i])).collect();
        polyline(&mut svg, &frame, &points, color, None);
        markers(&mut svg, &frame, &points, color);
        let label = if s.is_empty() { "T_c".to_string() } else { format!("s = {s}") };
        entries.push((label, color.to_string(), None));
    }
    legend(&mut svg, &entries);
    close(svg)
}

/// Diverging white-centered colour for `v / scale` in `[-1, 1]`.
fn diverging(v: f64, scale: f64) -> String {
    let t = if scale > 0.0 { (v / scale).clamp(-1.0, 1.0) } else { 0.0 };
    let fade = |c: f64| (255.0 - (255.0 - c) * t.abs()).round() as u8;
    let (r, g, b) =
        if t >= 0.0 { (fade(178.0), fade(24.0), fade(43.0)) } else { (fade(33.0), fade(102.0), fade(172.0)) };
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn unique_sorted(values: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn half_step(grid: &[f64]) -> f64 {
    grid.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min).min(1.0) / 2.0
}

fn delta_map(table: &ScanTable) -> String {
    let couplings = table.column("coupling");
    let temps = table.column("temperature");
    let delta = table.column("delta");
    let t_c = table.column("t_c");
    let t_n = table.column("t_n");
    let js = unique_sorted(&couplings);
    let ts = unique_sorted(&temps);
    let mut svg = String::new();
    open(&mut svg, "N - |W| for the two-site spin-1 ring");
    if js.is_empty() || ts.is_empty() {
        return close(svg);
    }
    let (hj, ht) = (if js.len() > 1 { half_step(&js) } else { 0.5 }, if ts.len() > 1 { half_step(&ts) } else { 0.5 });
    let frame = Frame::new((js[0] - hj, js[js.len() - 1] + hj), (ts[0] - ht, ts[ts.len() - 1] + ht));
    let scale = delta.iter().copied().filter(|v| v.is_finite()).fold(0.0, |m: f64, v| m.max(v.abs()));

    let _ = writeln!(svg, r#"<g shape-rendering="crispEdges">"#);
    for i in 0..couplings.len() {
        let (j, t) = (couplings[i], temps[i]);
        let x0 = frame.px(j - hj);
        let x1 = frame.px(j + hj);
        let y0 = frame.py(t + ht);
        let y1 = frame.py(t - ht);
        let _ = writeln!(
            svg,
            r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
            x1 - x0,
            y1 - y0,
            diverging(delta[i], scale)
        );
    }
    let _ = writeln!(svg, "</g>");

    // one threshold per coupling column
    let column_curve = |values: &[f64]| -> Vec<(f64, f64)> {
        js.iter()
            .filter_map(|&j| couplings.iter().position(|&c| c == j).map(|i| (j, values[i])))
            .filter(|(_, t)| *t <= ts[ts.len() - 1] + ht)
            .collect()
    };
    polyline(&mut svg, &frame, &column_curve(&t_c), "black", Some("2,3"));
    polyline(&mut svg, &frame, &column_curve(&t_n), "#555555", Some("8,4"));
    axes(&mut svg, &frame, "J", "T");
    legend(
        &mut svg,
        &[
            ("W = 0".to_string(), "black".to_string(), Some("2,3")),
            ("N = 0".to_string(), "#555555".to_string(), Some("8,4")),
        ],
    );
    colorbar(&mut svg, scale);
    close(svg)
}

fn colorbar(svg: &mut String, scale: f64) {
    let x = WIDTH - RIGHT + 16.0;
    let (top, bottom) = (TOP + 70.0, HEIGHT - BOTTOM);
    let steps = 32;
    let h = (bottom - top) / steps as f64;
    for k in 0..steps {
        let v = scale * (1.0 - 2.0 * (k as f64 + 0.5) / steps as f64);
        let y = top + h * k as f64;
        let _ = writeln!(
            svg,
            r#"<rect x="{x}" y="{y:.2}" width="16" height="{:.2}" fill="{}"/>"#,
            h + 0.5,
            diverging(v, scale)
        );
    }
    let _ =
        writeln!(svg, r#"<rect x="{x}" y="{top}" width="16" height="{}" fill="none" stroke="black"/>"#, bottom - top);
    for (v, y) in [(scale, top), (0.0, (top + bottom) / 2.0), (-scale, bottom)] {
        let _ = writeln!(svg, r#"<text x="{}" y="{:.2}">{}</text>"#, x + 22.0, y + 4.0, tick_label(v));
    }
    let _ = writeln!(svg, r#"<text x="{x}" y="{}">N - |W|</text>"#, top - 8.0);
}

fn close(mut svg: String) -> String {
    svg.push_str("</svg>\n");
    svg
}

/// Plot for one of the figure tables; `None` for any other table.
pub fn render(report: &Report) -> Option<String> {
    match report.table.name.as_str() {
        "fig1" => Some(spin_tc(&report.table)),
        "fig2" => Some(length_tc(&report.table)),
        "fig3" => Some(delta_map(&report.table)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tick_positions() {
        assert_eq!(ticks(0.0, 1.0), vec![0.0, 0.2, 0.4, 0.6000000000000001, 0.8, 1.0]);
        assert_eq!(tick_label(0.6000000000000001), "0.6");
        assert_eq!(tick_label(-0.0), "0");
    }

    #[test]
    fn colours_are_white_at_zero() {
        assert_eq!(diverging(0.0, 1.0), "#ffffff");
        assert_eq!(diverging(1.0, 1.0), "#b2182b");
        assert_eq!(diverging(-1.0, 1.0), "#2166ac");
    }

    #[test]
    fn empty_tables_still_render() {
        for name in ["fig1", "fig2", "fig3"] {
            let report = Report::new(
                ScanTable::new(name, &["s", "sites", "coupling", "temperature", "delta", "t_c", "t_n"]),
                "t",
                "t",
                1e-8,
            );
            let svg = render(&report).unwrap();
            assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        }
    }
}
