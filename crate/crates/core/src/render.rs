//! SVG persistence diagrams and barcodes.
//!
//! Both axes run over filtration indices `0..=65`; essential classes are
//! drawn on the row at 65, one past the last threshold. Dimension 0 is red,
//! dimension 1 green. Coincident points are drawn once and shaded by how
//! many classes share the coordinate.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::persistence::{PersistenceDiagram, PersistencePair};
use crate::FiltIndex;

/// Axis coordinate used for essential classes.
pub const ESSENTIAL_ROW: FiltIndex = 65;

/// Upper bounds of the multiplicity shade buckets: 1, 2-10, 11-100, >100.
pub const BUCKET_LIMITS: [usize; 3] = [1, 10, 100];

const BUCKET_OPACITY: [f64; 4] = [0.35, 0.55, 0.8, 1.0];
const BUCKET_LABELS: [&str; 4] = ["1", "2-10", "11-100", ">100"];

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub width: u32,
    pub height: u32,
    pub margin: u32,
    pub axis_max: FiltIndex,
    /// Fill colour per homology dimension.
    pub colors: [&'static str; 2],
}

impl Default for PlotSpec {
    fn default() -> Self {
        Self {
            width: 520,
            height: 520,
            margin: 48,
            axis_max: ESSENTIAL_ROW,
            colors: ["#d62728", "#2ca02c"],
        }
    }
}

impl PlotSpec {
    fn color(&self, dim: usize) -> &'static str {
        self.colors.get(dim).copied().unwrap_or("#555555")
    }

    fn plot_w(&self) -> f64 {
        f64::from(self.width - 2 * self.margin)
    }

    fn plot_h(&self) -> f64 {
        f64::from(self.height - 2 * self.margin)
    }

    fn x(&self, v: f64) -> f64 {
        f64::from(self.margin) + v / f64::from(self.axis_max) * self.plot_w()
    }

    fn y(&self, v: f64) -> f64 {
        f64::from(self.height - self.margin) - v / f64::from(self.axis_max) * self.plot_h()
    }
}

/// Shade bucket (0..=3) for a multiplicity.
pub fn multiplicity_bucket(count: usize) -> usize {
    BUCKET_LIMITS
        .iter()
        .position(|&limit| count <= limit)
        .unwrap_or(BUCKET_LIMITS.len())
}

fn header(out: &mut String, spec: &PlotSpec, title: &str) {
    let (w, h) = (spec.width, spec.height);
    writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#
    )
    .unwrap();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(out, "<title>{title}</title>").unwrap();
    writeln!(
        out,
        r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#
    )
    .unwrap();
}

fn x_axis(out: &mut String, spec: &PlotSpec, label: &str) {
    let y0 = spec.y(0.0);
    writeln!(
        out,
        r##"<line class="axis" x1="{:.2}" y1="{y0:.2}" x2="{:.2}" y2="{y0:.2}" stroke="#000"/>"##,
        spec.x(0.0),
        spec.x(f64::from(spec.axis_max))
    )
    .unwrap();
    for t in (0..=60).step_by(10) {
        let x = spec.x(f64::from(t));
        writeln!(
            out,
            r##"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="#000"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{t}</text>"##,
            y0 + 4.0,
            y0 + 16.0
        )
        .unwrap();
    }
    writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#,
        spec.x(f64::from(spec.axis_max) / 2.0),
        y0 + 32.0
    )
    .unwrap();
}

fn y_axis(out: &mut String, spec: &PlotSpec, label: &str) {
    let x0 = spec.x(0.0);
    writeln!(
        out,
        r##"<line class="axis" x1="{x0:.2}" y1="{:.2}" x2="{x0:.2}" y2="{:.2}" stroke="#000"/>"##,
        spec.y(0.0),
        spec.y(f64::from(spec.axis_max))
    )
    .unwrap();
    for t in (0..=60).step_by(10) {
        let y = spec.y(f64::from(t));
        writeln!(
            out,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="#000"/><text x="{:.2}" y="{:.2}" text-anchor="end">{t}</text>"##,
            x0 - 4.0,
            x0 - 6.0,
            y + 4.0
        )
        .unwrap();
    }
    let (lx, ly) = (x0 - 32.0, spec.y(f64::from(spec.axis_max) / 2.0));
    writeln!(
        out,
        r#"<text x="{lx:.2}" y="{ly:.2}" text-anchor="middle" transform="rotate(-90 {lx:.2} {ly:.2})">{label}</text>"#
    )
    .unwrap();
}

fn dims_present(pd: &PersistenceDiagram) -> Vec<usize> {
    let mut dims: Vec<usize> = pd.pairs.iter().map(|p| p.dim).collect();
    dims.dedup();
    dims
}

fn legend(out: &mut String, spec: &PlotSpec, dims: &[usize], with_buckets: bool) {
    let x = f64::from(spec.margin) + 8.0;
    let mut y = f64::from(spec.margin) + 8.0;
    for &d in dims {
        writeln!(
            out,
            r#"<rect class="legend" x="{x:.2}" y="{:.2}" width="10" height="10" fill="{}"/><text x="{:.2}" y="{:.2}">H{d}</text>"#,
            y - 8.0,
            spec.color(d),
            x + 14.0,
            y + 1.0
        )
        .unwrap();
        y += 14.0;
    }
    if with_buckets {
        for (b, label) in BUCKET_LABELS.iter().enumerate() {
            writeln!(
                out,
                r##"<circle class="legend" cx="{:.2}" cy="{:.2}" r="4" fill="#000" fill-opacity="{}"/><text x="{:.2}" y="{:.2}">{label}</text>"##,
                x + 5.0,
                y - 3.0,
                BUCKET_OPACITY[b],
                x + 14.0,
                y + 1.0
            )
            .unwrap();
            y += 14.0;
        }
    }
}

/// Scatter of `(birth, death)` with the diagonal, one mark per distinct
/// coordinate and dimension.
pub fn diagram_svg(pd: &PersistenceDiagram, spec: &PlotSpec) -> String {
    let mut out = String::new();
    header(&mut out, spec, "persistence diagram");
    x_axis(&mut out, spec, "birth");
    y_axis(&mut out, spec, "death");
    let top = f64::from(spec.axis_max);
    writeln!(
        out,
        r##"<line class="diagonal" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#888"/>"##,
        spec.x(0.0),
        spec.y(0.0),
        spec.x(top),
        spec.y(top)
    )
    .unwrap();
    writeln!(
        out,
        r##"<line class="essential-row" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#888" stroke-dasharray="4 3"/>"##,
        spec.x(0.0),
        spec.y(top),
        spec.x(top),
        spec.y(top)
    )
    .unwrap();

    let mut counts: BTreeMap<(usize, FiltIndex, Option<FiltIndex>), usize> = BTreeMap::new();
    for p in &pd.pairs {
        *counts.entry((p.dim, p.birth, p.death)).or_default() += 1;
    }
    // essentials sort after finite points of the same birth
    let mut marks: Vec<_> = counts.into_iter().collect();
    marks.sort_by_key(|&((d, b, death), _)| (d, death.is_none(), b, death));
    for ((dim, birth, death), count) in marks {
        let bucket = multiplicity_bucket(count);
        let cx = spec.x(f64::from(birth));
        let color = spec.color(dim);
        let opacity = BUCKET_OPACITY[bucket];
        match death {
            Some(d) => writeln!(
                out,
                r#"<circle class="point dim{dim} bucket{bucket}" cx="{cx:.2}" cy="{:.2}" r="3.5" fill="{color}" fill-opacity="{opacity}" data-birth="{birth}" data-death="{d}" data-count="{count}"/>"#,
                spec.y(f64::from(d))
            ),
            None => {
                let cy = spec.y(top);
                writeln!(
                    out,
                    r#"<path class="essential dim{dim} bucket{bucket}" d="M{cx:.2} {:.2} L{:.2} {cy:.2} L{cx:.2} {:.2} L{:.2} {cy:.2} Z" fill="{color}" fill-opacity="{opacity}" data-birth="{birth}" data-count="{count}"/>"#,
                    cy - 5.0,
                    cx + 5.0,
                    cy + 5.0,
                    cx - 5.0
                )
            }
        }
        .unwrap();
    }
    legend(&mut out, spec, &dims_present(pd), true);
    out.push_str("</svg>\n");
    out
}

/// One horizontal bar per class, sorted by `(dim, birth, death)`; essential
/// bars run to the right edge.
pub fn barcode_svg(pd: &PersistenceDiagram, spec: &PlotSpec) -> String {
    let mut out = String::new();
    header(&mut out, spec, "barcode");
    x_axis(&mut out, spec, "filtration index");
    let mut bars: Vec<&PersistencePair> = pd.pairs.iter().collect();
    bars.sort_by_key(|p| (p.dim, p.birth, p.death.unwrap_or(FiltIndex::MAX)));
    let step = if bars.is_empty() {
        0.0
    } else {
        spec.plot_h() / bars.len() as f64
    };
    let thickness = (step * 0.7).clamp(0.2, 6.0);
    for (k, p) in bars.iter().enumerate() {
        let y = f64::from(spec.margin) + step * (k as f64 + 0.5);
        let end = p.death.unwrap_or(spec.axis_max);
        let class = if p.is_essential() {
            "bar essential"
        } else {
            "bar"
        };
        writeln!(
            out,
            r#"<line class="{class} dim{}" x1="{:.2}" y1="{y:.3}" x2="{:.2}" y2="{y:.3}" stroke="{}" stroke-width="{thickness:.3}"/>"#,
            p.dim,
            spec.x(f64::from(p.birth)),
            spec.x(f64::from(end)),
            spec.color(p.dim)
        )
        .unwrap();
    }
    legend(&mut out, spec, &dims_present(pd), false);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexes::{FilteredComplex, FiltrationSchedule, Simplex};
    use crate::persistence::compute;

    fn diagram(pairs: Vec<PersistencePair>) -> PersistenceDiagram {
        PersistenceDiagram {
            pairs,
            zero_persistence: Vec::new(),
            dim2_creators: Vec::new(),
            n_simplices: 0,
            schedule: FiltrationSchedule::default(),
        }
    }

    fn pair(dim: usize, birth: FiltIndex, death: Option<FiltIndex>) -> PersistencePair {
        PersistencePair {
            dim,
            birth,
            death,
            creator: Simplex::new(&[0], 1).unwrap(),
            destroyer: None,
            representative: None,
        }
    }

    fn count(svg: &str, needle: &str) -> usize {
        svg.matches(needle).count()
    }

    #[test]
    fn buckets() {
        assert_eq!(multiplicity_bucket(1), 0);
        assert_eq!(multiplicity_bucket(2), 1);
        assert_eq!(multiplicity_bucket(10), 1);
        assert_eq!(multiplicity_bucket(11), 2);
        assert_eq!(multiplicity_bucket(100), 2);
        assert_eq!(multiplicity_bucket(101), 3);
    }

    #[test]
    fn empty_diagram_has_axes_and_diagonal() {
        let svg = diagram_svg(&diagram(Vec::new()), &PlotSpec::default());
        assert!(svg.contains(r#"class="diagonal""#));
        assert_eq!(count(&svg, r#"class="axis""#), 2);
        assert_eq!(count(&svg, "class=\"point"), 0);
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn single_point_above_diagonal() {
        let spec = PlotSpec::default();
        let svg = diagram_svg(&diagram(vec![pair(1, 3, Some(4))]), &spec);
        assert_eq!(count(&svg, "class=\"point dim1 bucket0\""), 1);
        assert!(svg.contains(r#"data-birth="3" data-death="4""#));
        // SVG y grows downward: above the diagonal means cy < y(birth)
        assert!(spec.y(4.0) < spec.y(3.0));
    }

    #[test]
    fn coincident_points_collapse() {
        let svg = diagram_svg(
            &diagram(vec![pair(1, 10, Some(20)); 100]),
            &PlotSpec::default(),
        );
        assert_eq!(count(&svg, "class=\"point"), 1);
        assert!(svg.contains(r#"data-count="100""#));
        assert!(svg.contains("bucket2"));
        let svg = diagram_svg(
            &diagram(vec![pair(1, 10, Some(20)); 101]),
            &PlotSpec::default(),
        );
        assert!(svg.contains("class=\"point dim1 bucket3\""));
    }

    #[test]
    fn essential_marker() {
        let svg = diagram_svg(&diagram(vec![pair(0, 1, None)]), &PlotSpec::default());
        assert_eq!(count(&svg, "class=\"essential dim0"), 1);
        assert_eq!(count(&svg, "class=\"point"), 0);
    }

    #[test]
    fn barcode_of_single_essential() {
        let spec = PlotSpec::default();
        let svg = barcode_svg(&diagram(vec![pair(0, 1, None)]), &spec);
        assert_eq!(count(&svg, "class=\"bar essential dim0\""), 1);
        assert!(svg.contains(&format!(r#"x2="{:.2}""#, spec.x(65.0))));
        assert!(svg.contains(spec.colors[0]));
    }

    #[test]
    fn barcode_of_triangle_filtration() {
        let simplices = [
            (vec![0], 1),
            (vec![1], 1),
            (vec![2], 1),
            (vec![0, 1], 2),
            (vec![1, 2], 2),
            (vec![0, 2], 3),
            (vec![0, 1, 2], 4),
        ]
        .into_iter()
        .map(|(v, f)| Simplex::new(&v, f).unwrap())
        .collect();
        let pd = compute(&FilteredComplex::from_simplices(3, simplices).unwrap()).unwrap();
        let spec = PlotSpec::default();
        let svg = barcode_svg(&pd, &spec);
        assert_eq!(count(&svg, "dim0\" x1"), 3);
        assert_eq!(count(&svg, "class=\"bar essential dim0\""), 1);
        assert_eq!(count(&svg, "class=\"bar dim1\""), 1);
        assert!(svg.contains(&format!(r#"x1="{:.2}""#, spec.x(3.0))));
        assert!(svg.contains(&format!(r#"x2="{:.2}""#, spec.x(4.0))));
    }

    #[test]
    fn empty_barcode() {
        let svg = barcode_svg(&diagram(Vec::new()), &PlotSpec::default());
        assert_eq!(count(&svg, "class=\"bar"), 0);
        assert_eq!(count(&svg, r#"class="axis""#), 1);
    }

    #[test]
    fn deterministic_output() {
        let pd = diagram(vec![
            pair(0, 1, Some(3)),
            pair(1, 2, Some(9)),
            pair(1, 2, Some(9)),
            pair(0, 1, None),
        ]);
        let spec = PlotSpec::default();
        assert_eq!(diagram_svg(&pd, &spec), diagram_svg(&pd.clone(), &spec));
        assert_eq!(barcode_svg(&pd, &spec), barcode_svg(&pd.clone(), &spec));
    }
}
