//! Standalone SVG line charts: PDR, end-to-end delay and overhead versus
//! attacker ratio, one series per attack, mirroring the result figures.

use crate::sweep::AggregateRow;
use std::collections::BTreeMap;
use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 48.0;

const COLORS: [&str; 6] =
    ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

pub struct ChartSpec {
    pub title: String,
    pub y_label: String,
    /// Extracts the plotted value from an aggregate row.
    pub value: fn(&AggregateRow) -> f64,
}

/// Renders one chart for one density. Returns None when there is nothing to
/// plot.
pub fn render_chart(rows: &[AggregateRow], nodes: usize, spec: &ChartSpec) -> Option<String> {
    let mut series: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
    for row in rows.iter().filter(|r| r.nodes == nodes) {
        let x = row.ratio_pct as f64;
        let y = (spec.value)(row);
        if row.series == "none" {
            // The shared baseline is the 0% point of every attack series.
            continue;
        }
        series.entry(&row.series).or_default().push((x, y));
    }
    if series.is_empty() {
        return None;
    }
    let baseline = rows
        .iter()
        .find(|r| r.nodes == nodes && r.series == "none")
        .map(spec.value);
    for points in series.values_mut() {
        if let Some(b) = baseline {
            if !points.iter().any(|&(x, _)| x == 0.0) {
                points.insert(0, (0.0, b));
            }
        }
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    }

    let ys: Vec<f64> = series.values().flatten().map(|&(_, y)| y).collect();
    let y_min_raw = ys.iter().cloned().fold(f64::INFINITY, f64::min);
    let y_max_raw = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let pad = ((y_max_raw - y_min_raw) * 0.08).max(y_max_raw.abs() * 0.02).max(1e-9);
    let y_min = (y_min_raw - pad).min(0.0_f64.max(y_min_raw - pad));
    let y_max = y_max_raw + pad;
    let x_min = 0.0;
    let x_max = 25.0;

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = |y: f64| MARGIN_T + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h;

    let mut svg = String::new();
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = write!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = write!(
        svg,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        MARGIN_L + plot_w / 2.0,
        xml_escape(&spec.title)
    );

    // Axes.
    let _ = write!(
        svg,
        r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        MARGIN_L,
        MARGIN_T + plot_h,
        MARGIN_L + plot_w,
        MARGIN_T + plot_h
    );
    let _ = write!(
        svg,
        r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        MARGIN_L, MARGIN_T, MARGIN_L, MARGIN_T + plot_h
    );

    // X ticks at each ratio.
    for r in [0u32, 5, 10, 15, 20, 25] {
        let x = sx(r as f64);
        let _ = write!(
            svg,
            r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="black"/>"#,
            MARGIN_T + plot_h,
            MARGIN_T + plot_h + 5.0
        );
        let _ = write!(
            svg,
            r#"<text x="{x}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{r}%</text>"#,
            MARGIN_T + plot_h + 20.0
        );
    }
    let _ = write!(
        svg,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle">attacker ratio</text>"#,
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 10.0
    );

    // Y ticks.
    for i in 0..=5 {
        let y_val = y_min + (y_max - y_min) * i as f64 / 5.0;
        let y = sy(y_val);
        let _ = write!(
            svg,
            r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="black"/>"#,
            MARGIN_L - 5.0,
            MARGIN_L
        );
        let _ = write!(
            svg,
            r##"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="#dddddd"/>"##,
            MARGIN_L,
            MARGIN_L + plot_w
        );
        let _ = write!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="end">{}</text>"#,
            MARGIN_L - 8.0,
            y + 4.0,
            format_tick(y_val)
        );
    }
    let _ = write!(
        svg,
        r#"<text x="16" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0,
        xml_escape(&spec.y_label)
    );

    // Series lines and legend.
    for (i, (name, points)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> =
            points.iter().map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y))).collect();
        let _ = write!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            path.join(" ")
        );
        for &(x, y) in points {
            let _ = write!(
                svg,
                r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{color}"/>"#,
                sx(x),
                sy(y)
            );
        }
        let ly = MARGIN_T + 16.0 + i as f64 * 18.0;
        let lx = MARGIN_L + plot_w + 12.0;
        let _ = write!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 22.0
        );
        let _ = write!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12">{}</text>"#,
            lx + 28.0,
            ly + 4.0,
            xml_escape(name)
        );
    }
    svg.push_str("</svg>\n");
    Some(svg)
}

fn format_tick(v: f64) -> String {
    if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else if v.abs() >= 1.0 {
        format!("{v:.1}")
    } else {
        format!("{v:.3}")
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// The three standard charts per density.
pub fn standard_charts() -> Vec<ChartSpec> {
    vec![
        ChartSpec {
            title: "Packet delivery ratio vs attacker ratio".into(),
            y_label: "PDR".into(),
            value: |r| r.pdr_mean,
        },
        ChartSpec {
            title: "End-to-end delay vs attacker ratio".into(),
            y_label: "E2E delay (s)".into(),
            value: |r| r.e2e_mean,
        },
        ChartSpec {
            title: "Routing overhead vs attacker ratio".into(),
            y_label: "overhead".into(),
            value: |r| r.overhead_mean,
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(nodes: usize, series: &str, ratio: u32, pdr: f64) -> AggregateRow {
        AggregateRow {
            nodes,
            series: series.into(),
            ratio_pct: ratio,
            runs: 10,
            pdr_mean: pdr,
            pdr_sd: 0.0,
            e2e_mean: 0.1,
            e2e_sd: 0.0,
            overhead_mean: 5.0,
            overhead_sd: 0.0,
        }
    }

    #[test]
    fn chart_contains_every_series() {
        let rows = vec![
            row(25, "none", 0, 0.93),
            row(25, "sinkhole", 5, 0.93),
            row(25, "sinkhole", 25, 0.92),
            row(25, "blackhole", 5, 0.80),
            row(25, "blackhole", 25, 0.70),
        ];
        let svg = render_chart(&rows, 25, &standard_charts()[0]).unwrap();
        assert!(svg.contains("sinkhole"));
        assert!(svg.contains("blackhole"));
        assert!(svg.contains("polyline"));
        assert!(svg.starts_with("<svg"));
    }

    #[test]
    fn empty_aggregates_produce_no_chart() {
        let rows: Vec<AggregateRow> = Vec::new();
        assert!(render_chart(&rows, 25, &standard_charts()[0]).is_none());
    }
}
