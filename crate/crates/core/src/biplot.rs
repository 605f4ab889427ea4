//! Two-dimensional biplot geometry and a plain SVG 1.1 rendering of it.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::document::{check_format, FitDocument};
use crate::error::{MelodicError, Result};

pub const GEOMETRY_FORMAT: &str = "melodic-biplot/1";

/// Decision lines are left out by default above this many responses.
pub const DECISION_LINE_LIMIT: usize = 6;

const SVG_SIZE: f64 = 800.0;
const SVG_MARGIN: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Window {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let eps = 1e-12 * (self.x1 - self.x0).max(self.y1 - self.y0);
        p[0] >= self.x0 - eps && p[0] <= self.x1 + eps && p[1] >= self.y0 - eps && p[1] <= self.y1 + eps
    }

    /// Parameter interval of `origin + t·dir` inside the window, if any.
    fn clip(&self, origin: [f64; 2], dir: [f64; 2]) -> Option<(f64, f64)> {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for (o, d, a, b) in [
            (origin[0], dir[0], self.x0, self.x1),
            (origin[1], dir[1], self.y0, self.y1),
        ] {
            if d.abs() < 1e-300 {
                if o < a || o > b {
                    return None;
                }
            } else {
                let (t0, t1) = ((a - o) / d, (b - o) / d);
                lo = lo.max(t0.min(t1));
                hi = hi.min(t0.max(t1));
            }
        }
        (lo <= hi).then_some((lo, hi))
    }
}

/// `svg_x = offset_x + scale·x`, `svg_y = offset_y − scale·y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvgMap {
    pub width: f64,
    pub height: f64,
    pub scale: f64,
    pub offset_x: f64,
    pub offset_y: f64,
}

impl SvgMap {
    fn for_window(w: &Window) -> Self {
        let inner = SVG_SIZE - 2.0 * SVG_MARGIN;
        let scale = (inner / (w.x1 - w.x0)).min(inner / (w.y1 - w.y0));
        let cx = 0.5 * (w.x0 + w.x1);
        let cy = 0.5 * (w.y0 + w.y1);
        SvgMap {
            width: SVG_SIZE,
            height: SVG_SIZE,
            scale,
            offset_x: SVG_SIZE / 2.0 - scale * cx,
            offset_y: SVG_SIZE / 2.0 + scale * cy,
        }
    }

    pub fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        [
            self.offset_x + self.scale * p[0],
            self.offset_y - self.scale * p[1],
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategoryPoint {
    pub label: String,
    pub response: usize,
    pub category: u8,
    pub position: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionLine {
    pub response: usize,
    pub midpoint: [f64; 2],
    /// Unit direction, perpendicular to the category segment.
    pub direction: [f64; 2],
    /// Visible part of the line; absent when it misses the window.
    pub segment: Option<[[f64; 2]; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Marker {
    /// Signed number of standard deviations from the mean.
    pub multiple: i64,
    pub position: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableAxis {
    pub name: String,
    /// Predictor weight row restricted to the plotted dimensions.
    pub direction: [f64; 2],
    /// Distance between consecutive markers, `sd_p·‖b_p‖`.
    pub marker_spacing: f64,
    pub markers: Vec<Marker>,
    pub segment: Option<[[f64; 2]; 2]>,
    /// Where the positive half of the axis leaves the window.
    pub label_position: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryDocument {
    pub format: String,
    pub dims: [usize; 2],
    pub window: Window,
    pub svg_map: SvgMap,
    pub category_points: Vec<CategoryPoint>,
    pub decision_lines_shown: bool,
    pub decision_lines: Vec<DecisionLine>,
    pub variable_axes: Vec<VariableAxis>,
    pub subject_points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiplotOptions {
    pub dims: [usize; 2],
    /// `None` fits the window around every plotted point.
    pub window: Option<Window>,
    /// `None` shows decision lines only for at most [`DECISION_LINE_LIMIT`] responses.
    pub decision_lines: Option<bool>,
}

impl Default for BiplotOptions {
    fn default() -> Self {
        BiplotOptions {
            dims: [0, 1],
            window: None,
            decision_lines: None,
        }
    }
}

/// Parse `auto` or `x0,x1,y0,y1`.
pub fn parse_window(text: &str) -> Result<Option<Window>> {
    if text.trim() == "auto" {
        return Ok(None);
    }
    let parts: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| MelodicError::config("window", "expected auto or x0,x1,y0,y1"))?;
    match parts[..] {
        [x0, x1, y0, y1] if x0 < x1 && y0 < y1 && parts.iter().all(|v| v.is_finite()) => {
            Ok(Some(Window { x0, x1, y0, y1 }))
        }
        _ => Err(MelodicError::config("window", "expected x0 < x1 and y0 < y1")),
    }
}

/// Parse `i,j` (1-based on the command line) into 0-based dimension indices.
pub fn parse_dims(text: &str) -> Result<[usize; 2]> {
    let parts: Vec<usize> = text
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| MelodicError::config("dims", "expected i,j"))?;
    match parts[..] {
        [i, j] if i >= 1 && j >= 1 && i != j => Ok([i - 1, j - 1]),
        _ => Err(MelodicError::config(
            "dims",
            "expected two distinct dimensions counted from 1",
        )),
    }
}

fn auto_window(points: &[[f64; 2]]) -> Window {
    let mut w = Window {
        x0: 0.0,
        x1: 0.0,
        y0: 0.0,
        y1: 0.0,
    };
    for p in points {
        w.x0 = w.x0.min(p[0]);
        w.x1 = w.x1.max(p[0]);
        w.y0 = w.y0.min(p[1]);
        w.y1 = w.y1.max(p[1]);
    }
    let pad = 0.05 * (w.x1 - w.x0).max(w.y1 - w.y0).max(1e-6);
    Window {
        x0: w.x0 - pad,
        x1: w.x1 + pad,
        y0: w.y0 - pad,
        y1: w.y1 + pad,
    }
}

fn segment(window: &Window, origin: [f64; 2], dir: [f64; 2]) -> Option<(f64, f64, [[f64; 2]; 2])> {
    let (lo, hi) = window.clip(origin, dir)?;
    let at = |t: f64| [origin[0] + t * dir[0], origin[1] + t * dir[1]];
    Some((lo, hi, [at(lo), at(hi)]))
}

/// Build the biplot for dimensions `dims` of a fitted model. `x` holds the
/// model-scale predictors of the subjects to plot.
pub fn biplot_geometry(
    doc: &FitDocument,
    x: &DMatrix<f64>,
    options: &BiplotOptions,
) -> Result<GeometryDocument> {
    let params = doc.params()?;
    let m = params.dimensions();
    if m < 2 {
        return Err(MelodicError::Unsupported(
            "a two-dimensional biplot needs a model with at least two dimensions".into(),
        ));
    }
    let [di, dj] = options.dims;
    if di >= m || dj >= m || di == dj {
        return Err(MelodicError::config(
            "dims",
            format!("need two distinct dimensions in 1..={m}"),
        ));
    }
    if x.ncols() != params.n_predictors() {
        return Err(MelodicError::DimensionMismatch(format!(
            "data has {} predictors, model has {}",
            x.ncols(),
            params.n_predictors()
        )));
    }
    let pick = |row: nalgebra::DMatrixView<f64>| [row[(0, di)], row[(0, dj)]];
    let u = x * &params.b;
    let subject_points: Vec<[f64; 2]> = (0..u.nrows()).map(|i| pick(u.rows(i, 1))).collect();

    let r = params.n_responses();
    let mut category_points = Vec::with_capacity(2 * r);
    for resp in 0..r {
        let (l, k) = (pick(params.l.rows(resp, 1)), pick(params.k.rows(resp, 1)));
        for (cat, sign) in [(0u8, 1.0), (1u8, -1.0)] {
            category_points.push(CategoryPoint {
                label: format!("{}{}", doc.response_names[resp], cat),
                response: resp,
                category: cat,
                position: [l[0] + sign * k[0], l[1] + sign * k[1]],
            });
        }
    }

    let window = match options.window {
        Some(w) => w,
        None => {
            let mut pts = subject_points.clone();
            pts.extend(category_points.iter().map(|c| c.position));
            auto_window(&pts)
        }
    };

    let decision_lines_shown = options.decision_lines.unwrap_or(r <= DECISION_LINE_LIMIT);
    let mut decision_lines = Vec::new();
    if decision_lines_shown {
        for resp in 0..r {
            let v0 = category_points[2 * resp].position;
            let v1 = category_points[2 * resp + 1].position;
            let d = [v0[0] - v1[0], v0[1] - v1[1]];
            let len = d[0].hypot(d[1]);
            if len < 1e-12 {
                // Coincident categories in this plane: no even-odds line to draw.
                continue;
            }
            let midpoint = [0.5 * (v0[0] + v1[0]), 0.5 * (v0[1] + v1[1])];
            let direction = [-d[1] / len, d[0] / len];
            decision_lines.push(DecisionLine {
                response: resp,
                midpoint,
                direction,
                segment: segment(&window, midpoint, direction).map(|s| s.2),
            });
        }
    }

    let mut variable_axes = Vec::with_capacity(params.n_predictors());
    for p in 0..params.n_predictors() {
        let dir = pick(params.b.rows(p, 1));
        let sd = doc.predictor_sd[p];
        let spacing = sd * dir[0].hypot(dir[1]);
        let clipped = if spacing > 1e-12 {
            segment(&window, [0.0, 0.0], dir)
        } else {
            None
        };
        let mut markers = Vec::new();
        let mut label_position = None;
        if let Some((lo, hi, _)) = clipped {
            // Marker t sits at t·sd along the weight row.
            let first = (lo / sd).ceil() as i64;
            let last = (hi / sd).floor() as i64;
            for t in first..=last {
                if t != 0 {
                    let s = t as f64 * sd;
                    markers.push(Marker {
                        multiple: t,
                        position: [s * dir[0], s * dir[1]],
                    });
                }
            }
            if hi > 0.0 {
                label_position = Some([hi * dir[0], hi * dir[1]]);
            }
        }
        variable_axes.push(VariableAxis {
            name: doc.predictor_names[p].clone(),
            direction: dir,
            marker_spacing: spacing,
            markers,
            segment: clipped.map(|s| s.2),
            label_position,
        });
    }

    let geometry = GeometryDocument {
        format: GEOMETRY_FORMAT.into(),
        dims: options.dims,
        window,
        svg_map: SvgMap::for_window(&window),
        category_points,
        decision_lines_shown,
        decision_lines,
        variable_axes,
        subject_points,
    };
    geometry.check_invariants()?;
    Ok(geometry)
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

impl GeometryDocument {
    /// Every decision line is orthogonal to its category segment and passes
    /// through its midpoint; markers sit at multiples of the axis spacing.
    pub fn check_invariants(&self) -> Result<()> {
        check_format(&self.format, GEOMETRY_FORMAT)?;
        for line in &self.decision_lines {
            let v0 = self.category_points[2 * line.response].position;
            let v1 = self.category_points[2 * line.response + 1].position;
            let d = [v0[0] - v1[0], v0[1] - v1[1]];
            let len = d[0].hypot(d[1]);
            let cos = dot(line.direction, d) / len;
            let mid = [0.5 * (v0[0] + v1[0]), 0.5 * (v0[1] + v1[1])];
            let offset = [mid[0] - line.midpoint[0], mid[1] - line.midpoint[1]];
            let scale = 1.0 + mid[0].abs().max(mid[1].abs());
            if cos.abs() > 1e-9 || offset[0].abs().max(offset[1].abs()) > 1e-9 * scale {
                return Err(MelodicError::Numerical(format!(
                    "decision line {} is not the perpendicular bisector",
                    line.response
                )));
            }
            if let Some([a, b]) = line.segment {
                // Both ends must lie on the line through the midpoint.
                for e in [a, b] {
                    let rel = [e[0] - mid[0], e[1] - mid[1]];
                    let e_scale = 1.0 + rel[0].abs().max(rel[1].abs());
                    if dot(rel, d).abs() / len > 1e-9 * e_scale {
                        return Err(MelodicError::Numerical(format!(
                            "decision line {} segment leaves the bisector",
                            line.response
                        )));
                    }
                }
            }
        }
        for axis in &self.variable_axes {
            let norm = axis.direction[0].hypot(axis.direction[1]);
            for mk in &axis.markers {
                let along = dot(mk.position, axis.direction) / norm;
                let expected = mk.multiple as f64 * axis.marker_spacing;
                if (along - expected).abs() > 1e-9 * (1.0 + expected.abs()) {
                    return Err(MelodicError::Numerical(format!(
                        "marker {} of {} is off its axis",
                        mk.multiple, axis.name
                    )));
                }
            }
        }
        Ok(())
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Render the geometry as a standalone SVG 1.1 document.
pub fn render_svg(g: &GeometryDocument) -> String {
    let map = &g.svg_map;
    let pt = |p: [f64; 2]| map.apply(p);
    let mut s = String::new();
    let _ = writeln!(s, r##"<?xml version="1.0" encoding="UTF-8"?>"##);
    let _ = writeln!(
        s,
        r##"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"##,
        w = map.width,
        h = map.height
    );
    let tl = pt([g.window.x0, g.window.y1]);
    let br = pt([g.window.x1, g.window.y0]);
    let _ = writeln!(
        s,
        r##"<rect x="{:.4}" y="{:.4}" width="{:.4}" height="{:.4}" fill="white" stroke="black"/>"##,
        tl[0],
        tl[1],
        br[0] - tl[0],
        br[1] - tl[1]
    );

    let _ = writeln!(s, r##"<g id="subjects" fill="#9bb7d4">"##);
    for p in &g.subject_points {
        let q = pt(*p);
        let _ = writeln!(s, r##"<circle cx="{:.4}" cy="{:.4}" r="1.5"/>"##, q[0], q[1]);
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(
        s,
        r##"<g id="variable-axes" stroke="#555555" font-family="sans-serif" font-size="11">"##
    );
    let mut used_labels: Vec<[f64; 2]> = Vec::new();
    for axis in &g.variable_axes {
        if let Some([a, b]) = axis.segment {
            let (a, b) = (pt(a), pt(b));
            let _ = writeln!(
                s,
                r##"<line x1="{:.4}" y1="{:.4}" x2="{:.4}" y2="{:.4}" stroke-width="0.8"/>"##,
                a[0], a[1], b[0], b[1]
            );
        }
        for mk in &axis.markers {
            let q = pt(mk.position);
            let _ = writeln!(
                s,
                r##"<circle cx="{:.4}" cy="{:.4}" r="2" fill="#555555"/>"##,
                q[0], q[1]
            );
        }
        if let Some(lp) = axis.label_position {
            let mut q = pt(lp);
            // Greedy vertical nudge away from labels already placed.
            while used_labels
                .iter()
                .any(|u| (u[0] - q[0]).abs() < 40.0 && (u[1] - q[1]).abs() < 12.0)
            {
                q[1] += 12.0;
            }
            used_labels.push(q);
            let _ = writeln!(
                s,
                r##"<text x="{:.4}" y="{:.4}" stroke="none" fill="#333333">{}</text>"##,
                q[0],
                q[1],
                escape(&axis.name)
            );
        }
    }
    let _ = writeln!(s, "</g>");

    if g.decision_lines_shown {
        let _ = writeln!(
            s,
            r##"<g id="decision-lines" stroke="#b03030" stroke-dasharray="4 3">"##
        );
        for line in &g.decision_lines {
            if let Some([a, b]) = line.segment {
                let (a, b) = (pt(a), pt(b));
                let _ = writeln!(
                    s,
                    r##"<line x1="{:.4}" y1="{:.4}" x2="{:.4}" y2="{:.4}"/>"##,
                    a[0], a[1], b[0], b[1]
                );
            }
        }
        let _ = writeln!(s, "</g>");
    }

    let _ = writeln!(
        s,
        r##"<g id="categories" font-family="sans-serif" font-size="12">"##
    );
    for c in &g.category_points {
        let q = pt(c.position);
        let fill = if c.category == 1 { "#1a5e1a" } else { "#8a1a1a" };
        let _ = writeln!(
            s,
            r##"<circle cx="{:.4}" cy="{:.4}" r="4" fill="{fill}"/>"##,
            q[0], q[1]
        );
        let _ = writeln!(
            s,
            r##"<text x="{:.4}" y="{:.4}" fill="{fill}">{}</text>"##,
            q[0] + 5.0,
            q[1] - 5.0,
            escape(&c.label)
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    s
}
