//! Minimal static SVG charts.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(title: &str, x_label: &str, y_label: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, (LEFT + W - RIGHT) / 2.0, escape(title));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (LEFT + W - RIGHT) / 2.0, H - 15.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="18" y="{y}" text-anchor="middle" transform="rotate(-90 18 {y})">{}</text>"#,
        escape(y_label),
        y = (TOP + H - BOTTOM) / 2.0
    );
    s
}

fn frame(s: &mut String) {
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - LEFT - RIGHT,
        H - TOP - BOTTOM
    );
}

fn legend(s: &mut String, names: &[String]) {
    for (i, name) in names.iter().enumerate() {
        let y = TOP + 10.0 + 20.0 * i as f64;
        let x = W - RIGHT + 12.0;
        let _ = writeln!(s, r#"<rect x="{x}" y="{}" width="14" height="10" fill="{}"/>"#, y - 9.0, PALETTE[i % PALETTE.len()]);
        let _ = writeln!(s, r#"<text x="{}" y="{y}">{}</text>"#, x + 20.0, escape(name));
    }
}

/// Round step giving roughly `n` intervals over `span`.
fn nice_step(span: f64, n: f64) -> f64 {
    let raw = (span / n).max(f64::MIN_POSITIVE);
    let mag = 10f64.powf(raw.log10().floor());
    let r = raw / mag;
    mag * if r <= 1.0 {
        1.0
    } else if r <= 2.0 {
        2.0
    } else if r <= 5.0 {
        5.0
    } else {
        10.0
    }
}

fn y_range(values: impl Iterator<Item = f64>, include_zero: bool) -> (f64, f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0, 0.2);
    }
    if include_zero {
        lo = lo.min(0.0);
        hi = hi.max(0.0);
    }
    if hi - lo < 1e-12 {
        hi += 1.0;
        lo -= 1.0;
    }
    let step = nice_step(hi - lo, 5.0);
    ((lo / step).floor() * step, (hi / step).ceil() * step, step)
}

fn fmt_tick(v: f64) -> String {
    let r = (v * 1e6).round() / 1e6;
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

fn y_axis(s: &mut String, lo: f64, hi: f64, step: f64) -> impl Fn(f64) -> f64 {
    let py = move |v: f64| TOP + (H - TOP - BOTTOM) * (1.0 - (v - lo) / (hi - lo));
    let mut v = lo;
    while v <= hi + step * 1e-9 {
        let y = py(v);
        let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{y}" x2="{}" y2="{y}" stroke="#ddd"/>"##, W - RIGHT);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, LEFT - 6.0, y + 4.0, fmt_tick(v));
        v += step;
    }
    py
}

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Line chart; with `log_x` the x ticks sit at the distinct data abscissae.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, log_x: bool, series: &[Series]) -> String {
    let mut s = header(title, x_label, y_label);
    let xs: Vec<f64> = {
        let mut v: Vec<f64> = series.iter().flat_map(|se| se.points.iter().map(|p| p.0)).filter(|x| x.is_finite()).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    };
    let tx = |x: f64| if log_x { x.max(f64::MIN_POSITIVE).log10() } else { x };
    let (x0, x1) = match (xs.first(), xs.last()) {
        (Some(&a), Some(&b)) if tx(b) > tx(a) => (tx(a), tx(b)),
        (Some(&a), _) => (tx(a) - 1.0, tx(a) + 1.0),
        _ => (0.0, 1.0),
    };
    let px = |x: f64| LEFT + 10.0 + (W - LEFT - RIGHT - 20.0) * (tx(x) - x0) / (x1 - x0);
    let (lo, hi, step) = y_range(series.iter().flat_map(|se| se.points.iter().map(|p| p.1)), false);
    let py = y_axis(&mut s, lo, hi, step);
    frame(&mut s);
    let ticks: Vec<f64> = if log_x {
        xs.clone()
    } else {
        let st = nice_step(x1 - x0, 6.0);
        let mut t = Vec::new();
        let mut v = (x0 / st).ceil() * st;
        while v <= x1 + st * 1e-9 {
            t.push(v);
            v += st;
        }
        t
    };
    for &x in &ticks {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            px(x),
            H - BOTTOM + 18.0,
            fmt_tick(x)
        );
    }
    for (i, se) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = se
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, pts.join(" "));
        for p in &pts {
            let (cx, cy) = p.split_once(',').expect("formatted pair");
            let _ = writeln!(s, r#"<circle class="point" cx="{cx}" cy="{cy}" r="3" fill="{color}"/>"#);
        }
    }
    legend(&mut s, &series.iter().map(|se| se.name.clone()).collect::<Vec<_>>());
    s.push_str("</svg>\n");
    s
}

/// One row of sounding ticks per strategy over `[0, window_ms]`, with grey
/// bands marking `shaded` intervals.
pub fn event_raster(title: &str, window_ms: f64, rows: &[(String, Vec<f64>)], shaded: &[(f64, f64)]) -> String {
    let mut s = header(title, "time (ms)", "");
    let px = |t: f64| LEFT + (W - LEFT - RIGHT) * t / window_ms;
    for &(a, b) in shaded {
        let (a, b) = (a.max(0.0), b.min(window_ms));
        if b > a {
            let _ = writeln!(
                s,
                r##"<rect class="high" x="{}" y="{TOP}" width="{}" height="{}" fill="#ccc"/>"##,
                px(a),
                px(b) - px(a),
                H - TOP - BOTTOM
            );
        }
    }
    frame(&mut s);
    let band = (H - TOP - BOTTOM) / rows.len().max(1) as f64;
    for (i, (name, ticks)) in rows.iter().enumerate() {
        let y0 = TOP + band * i as f64 + band * 0.2;
        let y1 = TOP + band * (i + 1) as f64 - band * 0.2;
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, LEFT - 6.0, (y0 + y1) / 2.0 + 4.0, escape(name));
        for &t in ticks {
            let x = px(t);
            let _ = writeln!(s, r#"<line class="tick" x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{y1:.2}" stroke="black"/>"#);
        }
    }
    let step = nice_step(window_ms, 8.0);
    let mut t = 0.0;
    while t <= window_ms + step * 1e-9 {
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, px(t), H - BOTTOM + 18.0, fmt_tick(t));
        t += step;
    }
    s.push_str("</svg>\n");
    s
}

/// Grouped bars: `values[g][b]` is bar `b` of group `g`.
pub fn grouped_bars(title: &str, y_label: &str, groups: &[String], bars: &[String], values: &[Vec<f64>]) -> String {
    let mut s = header(title, "", y_label);
    let (lo, hi, step) = y_range(values.iter().flatten().cloned(), true);
    let py = y_axis(&mut s, lo, hi, step);
    frame(&mut s);
    let gw = (W - LEFT - RIGHT) / groups.len().max(1) as f64;
    let bw = gw * 0.7 / bars.len().max(1) as f64;
    for (g, name) in groups.iter().enumerate() {
        let gx = LEFT + gw * g as f64 + gw * 0.15;
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, gx + gw * 0.35, H - BOTTOM + 18.0, escape(name));
        for (b, v) in values.get(g).map(|v| v.as_slice()).unwrap_or(&[]).iter().enumerate() {
            if !v.is_finite() {
                continue;
            }
            let (y0, y1) = (py(v.max(0.0)), py(v.min(0.0)));
            let _ = writeln!(
                s,
                r#"<rect class="bar" x="{:.2}" y="{y0:.2}" width="{bw:.2}" height="{:.2}" fill="{}"/>"#,
                gx + bw * b as f64,
                y1 - y0,
                PALETTE[b % PALETTE.len()]
            );
        }
    }
    let _ = writeln!(s, r#"<line x1="{LEFT}" y1="{y}" x2="{}" y2="{y}" stroke="black"/>"#, W - RIGHT, y = py(0.0));
    legend(&mut s, bars);
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raster_has_one_tick_per_event() {
        let svg = event_raster("t", 100.0, &[("a".into(), vec![1.0, 2.0]), ("b".into(), vec![3.0])], &[(0.0, 50.0)]);
        assert_eq!(svg.matches(r#"class="tick""#).count(), 3);
        assert_eq!(svg.matches(r#"class="high""#).count(), 1);
    }

    #[test]
    fn line_chart_plots_every_point() {
        let se = vec![Series { name: "MU2".into(), points: vec![(2.0, 1.0), (5.0, 2.0), (400.0, 0.5)] }];
        let svg = line_chart("t", "x", "y", true, &se);
        assert_eq!(svg.matches(r#"class="point""#).count(), 3);
    }

    #[test]
    fn nice_steps() {
        assert_eq!(nice_step(10.0, 5.0), 2.0);
        assert_eq!(nice_step(0.7, 5.0), 0.2);
    }
}
