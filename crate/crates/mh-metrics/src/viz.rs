//! Deterministic SVG rendering of the per-cut sub-measures.
//!
//! Each cut gets a unit-square panel showing the conditional pair
//! `(Gc1, Gc2)`, which always sits on the anti-diagonal `x + y = 1`. The
//! locus is drawn dashed, red on the half above the center (departure toward
//! larger column categories) and blue below; the observed pair is a filled
//! circle whose area is proportional to the cut's weight, labeled with the
//! sub-measure to three decimals. Panels sit on the diagonal of an
//! `(r-1) x (r-1)` grid indexed by cut number on both axes, so the figure
//! reads bottom-left to top-right like the table's own ordering. Cuts with no
//! off-diagonal mass render as an empty panel annotated "n/a" so panel
//! positions always match cut numbers.
//!
//! Rendering is a pure function of the spec: geometry is serialized with
//! fixed four-decimal precision and no environment-dependent input, so equal
//! specs produce byte-identical documents.

use serde::{Deserialize, Serialize};

use crate::error::MhError;
use crate::measures::SubMeasure;
use crate::table::MarginalSummary;

/// Visual parameters of the rendered figure. All fields have defaults, so a
/// partial JSON object (for example `{"maxRadius": 4}`) is a valid style.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct VizStyle {
    /// Width and height of the square canvas, px.
    pub canvas: f64,
    /// Radius of the circle drawn for the heaviest cut, px.
    pub max_radius: f64,
    /// Label and axis font size, px.
    pub font_size: f64,
    /// Color of the deteriorating half-locus and points (`Gc1 < Gc2`).
    pub red: String,
    /// Color of the improving half-locus and points (`Gc1 >= Gc2`).
    pub blue: String,
    /// Dash pattern of the locus segments.
    pub dash: String,
}

impl Default for VizStyle {
    fn default() -> Self {
        VizStyle {
            canvas: 640.0,
            max_radius: 10.0,
            font_size: 10.0,
            red: "#d62728".to_string(),
            blue: "#1f77b4".to_string(),
            dash: "4,3".to_string(),
        }
    }
}

/// Which half of the locus a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PanelColor {
    /// `Gc1 < Gc2`: the pair sits above the center.
    Red,
    /// `Gc1 >= Gc2` (ties included).
    Blue,
}

/// One panel of the figure.
#[derive(Debug, Clone, PartialEq)]
pub struct VizLevel {
    /// Cut index, 1-based.
    pub level: usize,
    /// Horizontal position: `Gc1` (0.5 when undefined).
    pub x: f64,
    /// Vertical position: `Gc2` (0.5 when undefined).
    pub y: f64,
    /// The cut's weight; 0 when undefined.
    pub size: f64,
    /// Sub-measure formatted to three decimals, or "n/a".
    pub label: String,
    /// Point and half-locus color.
    pub color: PanelColor,
    /// False when the cut carries no off-diagonal mass.
    pub defined: bool,
}

/// Everything [`render_svg`] needs.
#[derive(Debug, Clone, PartialEq)]
pub struct VizSpec {
    /// Table dimension; the figure has `r - 1` panels.
    pub r: usize,
    /// One entry per cut, in cut order.
    pub levels: Vec<VizLevel>,
    /// Visual parameters.
    pub style: VizStyle,
}

/// Formats a sub-measure to three decimals, rounding halves up.
fn format_label(gamma: f64) -> String {
    let scaled = (gamma * 1000.0).round() as i64;
    format!("{}.{:03}", scaled / 1000, scaled % 1000)
}

/// Builds the figure spec from a marginal summary and its sub-measures
/// (`None` marking cuts with no off-diagonal mass, as produced by
/// [`sub_measures`](crate::measures::sub_measures)).
pub fn build_viz_spec(
    s: &MarginalSummary,
    subs: &[Option<SubMeasure>],
    style: VizStyle,
) -> Result<VizSpec, MhError> {
    if subs.len() != s.levels.len() {
        return Err(MhError::LengthMismatch {
            expected: s.levels.len(),
            found: subs.len(),
        });
    }
    let levels = s
        .levels
        .iter()
        .zip(subs)
        .map(|(l, sub)| match sub {
            Some(sub) => {
                let x = l.gc1.expect("sub-measure exists, so the block is nonzero");
                let y = l.gc2.expect("sub-measure exists, so the block is nonzero");
                VizLevel {
                    level: l.level,
                    x,
                    y,
                    size: l.weight.unwrap_or(0.0),
                    label: format_label(sub.gamma),
                    color: if x < y { PanelColor::Red } else { PanelColor::Blue },
                    defined: true,
                }
            }
            None => VizLevel {
                level: l.level,
                x: 0.5,
                y: 0.5,
                size: 0.0,
                label: "n/a".to_string(),
                color: PanelColor::Blue,
                defined: false,
            },
        })
        .collect();
    Ok(VizSpec { r: s.r(), levels, style })
}

const GUTTER_LEFT: f64 = 34.0;
const GUTTER_RIGHT: f64 = 8.0;
const GUTTER_TOP: f64 = 8.0;
const GUTTER_BOTTOM: f64 = 30.0;
const PANEL_GAP: f64 = 6.0;

const TEXT_COLOR: &str = "#333333";
const MUTED_COLOR: &str = "#888888";
const FRAME_COLOR: &str = "#999999";

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders the figure as an SVG 1.1 document. Equal specs yield
/// byte-identical output.
pub fn render_svg(spec: &VizSpec) -> Result<String, MhError> {
    let m = spec.r.saturating_sub(1);
    if m == 0 || spec.levels.len() != m {
        return Err(MhError::LengthMismatch {
            expected: m,
            found: spec.levels.len(),
        });
    }
    let st = &spec.style;
    if !(st.canvas.is_finite() && st.canvas > 0.0)
        || !(st.max_radius.is_finite() && st.max_radius > 0.0)
        || !(st.font_size.is_finite() && st.font_size > 0.0)
    {
        return Err(MhError::ZeroCanvas);
    }
    let pad = st.max_radius + 2.0;
    let plot_w = st.canvas - GUTTER_LEFT - GUTTER_RIGHT;
    let plot_h = st.canvas - GUTTER_TOP - GUTTER_BOTTOM;
    let mf = m as f64;
    let panel_w = (plot_w - (mf - 1.0) * PANEL_GAP) / mf;
    let panel_h = (plot_h - (mf - 1.0) * PANEL_GAP) / mf;
    let inner_w = panel_w - 2.0 * pad;
    let inner_h = panel_h - 2.0 * pad;
    if inner_w <= 0.0 || inner_h <= 0.0 {
        return Err(MhError::ZeroCanvas);
    }
    let max_size = spec
        .levels
        .iter()
        .filter(|l| l.defined)
        .map(|l| l.size)
        .fold(0.0, f64::max);

    let font = st.font_size;
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{c:.4}\" height=\"{c:.4}\" \
         viewBox=\"0 0 {c:.4} {c:.4}\">\n",
        c = st.canvas
    ));

    for l in &spec.levels {
        let col = (l.level - 1) as f64;
        let row = (m - l.level) as f64;
        let x0 = GUTTER_LEFT + col * (panel_w + PANEL_GAP);
        let y0 = GUTTER_TOP + row * (panel_h + PANEL_GAP);
        out.push_str(&format!(
            "<rect x=\"{x0:.4}\" y=\"{y0:.4}\" width=\"{panel_w:.4}\" height=\"{panel_h:.4}\" \
             fill=\"none\" stroke=\"{FRAME_COLOR}\" stroke-width=\"1\"/>\n"
        ));
        if !l.defined {
            out.push_str(&format!(
                "<text x=\"{:.4}\" y=\"{:.4}\" text-anchor=\"middle\" \
                 font-family=\"sans-serif\" font-size=\"{font:.4}\" \
                 fill=\"{MUTED_COLOR}\">n/a</text>\n",
                x0 + panel_w / 2.0,
                y0 + panel_h / 2.0 + 0.35 * font,
            ));
            continue;
        }
        // Data coordinates: x right, y up, both in [0, 1].
        let map = |x: f64, y: f64| (x0 + pad + x * inner_w, y0 + pad + (1.0 - y) * inner_h);
        let (tlx, tly) = map(0.0, 1.0);
        let (cx, cy) = map(0.5, 0.5);
        let (brx, bry) = map(1.0, 0.0);
        out.push_str(&format!(
            "<line x1=\"{tlx:.4}\" y1=\"{tly:.4}\" x2=\"{cx:.4}\" y2=\"{cy:.4}\" \
             stroke=\"{}\" stroke-dasharray=\"{}\"/>\n",
            xml_escape(&st.red),
            xml_escape(&st.dash)
        ));
        out.push_str(&format!(
            "<line x1=\"{cx:.4}\" y1=\"{cy:.4}\" x2=\"{brx:.4}\" y2=\"{bry:.4}\" \
             stroke=\"{}\" stroke-dasharray=\"{}\"/>\n",
            xml_escape(&st.blue),
            xml_escape(&st.dash)
        ));
        let (px, py) = map(l.x, l.y);
        let radius = if max_size > 0.0 {
            st.max_radius * (l.size / max_size).sqrt()
        } else {
            0.0
        };
        let color = match l.color {
            PanelColor::Red => &st.red,
            PanelColor::Blue => &st.blue,
        };
        if radius > 0.0 {
            out.push_str(&format!(
                "<circle cx=\"{px:.4}\" cy=\"{py:.4}\" r=\"{radius:.4}\" fill=\"{}\"/>\n",
                xml_escape(color)
            ));
        }
        // Labels hug the point on the side with room: rightward in the left
        // half of the panel, leftward otherwise, dropping below the point
        // when a top corner would push the text outside the panel.
        let (anchor, tx) = if l.x < 0.5 {
            ("start", px + radius + 3.0)
        } else {
            ("end", px - radius - 3.0)
        };
        let mut ty = py - radius - 3.0;
        if ty - font < y0 {
            ty = py + radius + 3.0 + font;
        }
        out.push_str(&format!(
            "<text x=\"{tx:.4}\" y=\"{ty:.4}\" text-anchor=\"{anchor}\" \
             font-family=\"sans-serif\" font-size=\"{font:.4}\" \
             fill=\"{TEXT_COLOR}\">{}</text>\n",
            xml_escape(&l.label)
        ));
    }

    // Axes: cut numbers along the bottom (Gc1) and the left (Gc2).
    for i in 1..=m {
        let col = (i - 1) as f64;
        let row = (m - i) as f64;
        let xc = GUTTER_LEFT + col * (panel_w + PANEL_GAP) + panel_w / 2.0;
        let yc = GUTTER_TOP + row * (panel_h + PANEL_GAP) + panel_h / 2.0;
        out.push_str(&format!(
            "<text x=\"{xc:.4}\" y=\"{:.4}\" text-anchor=\"middle\" \
             font-family=\"sans-serif\" font-size=\"{font:.4}\" \
             fill=\"{TEXT_COLOR}\">{i}</text>\n",
            GUTTER_TOP + plot_h + 14.0
        ));
        out.push_str(&format!(
            "<text x=\"{:.4}\" y=\"{:.4}\" text-anchor=\"end\" \
             font-family=\"sans-serif\" font-size=\"{font:.4}\" \
             fill=\"{TEXT_COLOR}\">{i}</text>\n",
            GUTTER_LEFT - 6.0,
            yc + 0.35 * font
        ));
    }
    out.push_str(&format!(
        "<text x=\"{:.4}\" y=\"{:.4}\" text-anchor=\"middle\" \
         font-family=\"sans-serif\" font-size=\"{font:.4}\" \
         fill=\"{TEXT_COLOR}\">Gc1 level</text>\n",
        GUTTER_LEFT + plot_w / 2.0,
        st.canvas - 8.0
    ));
    out.push_str(&format!(
        "<text x=\"12\" y=\"{0:.4}\" text-anchor=\"middle\" \
         font-family=\"sans-serif\" font-size=\"{font:.4}\" \
         fill=\"{TEXT_COLOR}\" transform=\"rotate(-90 12 {0:.4})\">Gc2 level</text>\n",
        GUTTER_TOP + plot_h / 2.0
    ));
    out.push_str("</svg>\n");
    Ok(out)
}
