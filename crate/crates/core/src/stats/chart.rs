//! Grouped-bar SVG chart of label proportions, one panel per tested word.

use std::fmt::Write as _;

use super::report::format_p_value;
use super::{StatsReport, WordType};
use crate::corpus::Label;

const PANEL_W: f64 = 190.0;
const PANEL_H: f64 = 210.0;
const PLOT_TOP: f64 = 42.0;
const PLOT_H: f64 = 130.0;
const PLOT_LEFT: f64 = 30.0;
const BAR_W: f64 = 36.0;
const BAR_GAP: f64 = 12.0;
const MARGIN: f64 = 10.0;
const LEGEND_H: f64 = 28.0;
const COLORS: [&str; 3] = ["#4c72b0", "#dd8452", "#c44e52"];

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn panel(out: &mut String, x: f64, y: f64, title: &str, subtitle: &str, proportions: [f64; 3]) {
    let _ = writeln!(
        out,
        r#"<g class="panel" transform="translate({x:.1},{y:.1})">"#
    );
    let _ = writeln!(
        out,
        r##"<rect x="0" y="0" width="{:.1}" height="{:.1}" fill="#ffffff" stroke="#cccccc"/>"##,
        PANEL_W - MARGIN,
        PANEL_H - MARGIN
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="16" text-anchor="middle" font-size="13" font-weight="bold">{}</text>"#,
        (PANEL_W - MARGIN) / 2.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="32" text-anchor="middle" font-size="11">{}</text>"#,
        (PANEL_W - MARGIN) / 2.0,
        escape(subtitle)
    );
    // axis with 0/50/100 gridlines
    for tick in [0.0, 50.0, 100.0] {
        let ty = PLOT_TOP + PLOT_H - PLOT_H * tick / 100.0;
        let _ = writeln!(
            out,
            r##"<line x1="{PLOT_LEFT:.1}" y1="{ty:.1}" x2="{:.1}" y2="{ty:.1}" stroke="#e0e0e0"/>"##,
            PANEL_W - MARGIN - 6.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="9">{tick:.0}</text>"#,
            PLOT_LEFT - 3.0,
            ty + 3.0
        );
    }
    for (i, (label, value)) in Label::ALL.iter().zip(proportions).enumerate() {
        let h = PLOT_H * value / 100.0;
        let bx = PLOT_LEFT + BAR_GAP + i as f64 * (BAR_W + BAR_GAP);
        let by = PLOT_TOP + PLOT_H - h;
        let _ = writeln!(
            out,
            r#"<rect class="bar" data-label="{label}" data-value="{value:.4}" x="{bx:.1}" y="{by:.2}" width="{BAR_W:.1}" height="{h:.2}" fill="{}"/>"#,
            COLORS[i]
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.2}" text-anchor="middle" font-size="9">{value:.2}</text>"#,
            bx + BAR_W / 2.0,
            by - 3.0
        );
    }
    out.push_str("</g>\n");
}

/// Renders one row of panels per word type that has results. Each row starts
/// with the expected-proportion panel.
pub fn render_proportion_chart(report: &StatsReport) -> String {
    let groups: Vec<WordType> = [WordType::SubjectNoun, WordType::MainVerb]
        .into_iter()
        .filter(|t| !report.rows(*t).is_empty())
        .collect();
    let columns = groups
        .iter()
        .map(|t| report.rows(*t).len() + 1)
        .max()
        .unwrap_or(1);
    let width = columns as f64 * PANEL_W + MARGIN;
    let height = groups.len().max(1) as f64 * (PANEL_H + 20.0) + LEGEND_H + MARGIN;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif">"#
    );
    let _ = writeln!(
        out,
        r##"<rect x="0" y="0" width="{width:.0}" height="{height:.0}" fill="#fafafa"/>"##
    );
    for (i, label) in Label::ALL.iter().enumerate() {
        let lx = MARGIN + i as f64 * 120.0;
        let _ = writeln!(
            out,
            r#"<rect x="{lx:.1}" y="8" width="12" height="12" fill="{}"/><text x="{:.1}" y="18" font-size="12">{label}</text>"#,
            COLORS[i],
            lx + 16.0
        );
    }
    for (row, word_type) in groups.iter().enumerate() {
        let y = LEGEND_H + row as f64 * (PANEL_H + 20.0);
        let _ = writeln!(
            out,
            r#"<text x="{MARGIN:.1}" y="{:.1}" font-size="12" font-style="italic">{}</text>"#,
            y + 12.0,
            word_type.title()
        );
        let py = y + 18.0;
        panel(
            &mut out,
            MARGIN,
            py,
            "Expected proportion",
            &format!("p = {}", format_p_value(report.expected.p_value)),
            report.expected.proportions,
        );
        for (col, r) in report.rows(*word_type).iter().enumerate() {
            panel(
                &mut out,
                MARGIN + (col + 1) as f64 * PANEL_W,
                py,
                &r.word,
                &format!("p = {}", format_p_value(r.p_value)),
                r.proportions,
            );
        }
    }
    out.push_str("</svg>\n");
    out
}
