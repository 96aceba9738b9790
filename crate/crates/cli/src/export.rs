//! Phase portraits as SVG and polylines as CSV.

use std::fmt::Write as _;

use meanfol::expr::{Axis, Domain};
use meanfol::foliation::Configuration;
use meanfol::geometry::Foliation;
use meanfol::singularities::{Kind, Scan};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyKind {
    Leaf,
    Separatrix,
    Cycle,
}

impl PolyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolyKind::Leaf => "leaf",
            PolyKind::Separatrix => "separatrix",
            PolyKind::Cycle => "cycle",
        }
    }
}

/// A traced curve in parameter space, split where it wraps around a
/// periodic axis.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyline {
    pub kind: PolyKind,
    pub foliation: Foliation,
    pub pieces: Vec<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Marker {
    pub index: usize,
    pub uv: [f64; 2],
    pub kind: Option<Kind>,
    pub label: String,
}

/// Everything drawn in a portrait.
#[derive(Clone, Debug, PartialEq)]
pub struct Plot {
    pub domain: Domain,
    pub markers: Vec<Marker>,
    pub polylines: Vec<Polyline>,
}

/// Wraps periodic coordinates into the domain and splits wherever
/// consecutive points are joined across a seam.
pub fn split_at_wraps(domain: &Domain, points: &[[f64; 2]]) -> Vec<Vec<[f64; 2]>> {
    let wrap = |ax: &Axis, x: f64| if ax.periodic { ax.wrap(x).unwrap_or(x) } else { x };
    let mut pieces: Vec<Vec<[f64; 2]>> = Vec::new();
    let mut cur: Vec<[f64; 2]> = Vec::new();
    for &p in points {
        let p = [wrap(&domain.u, p[0]), wrap(&domain.v, p[1])];
        if let Some(&q) = cur.last() {
            let d = domain.delta(q, p);
            let jump = (p[0] - q[0] - d[0]).abs() + (p[1] - q[1] - d[1]).abs();
            if jump > 1e-9 {
                pieces.push(std::mem::take(&mut cur));
            }
        }
        cur.push(p);
    }
    if !cur.is_empty() {
        pieces.push(cur);
    }
    pieces.retain(|p| p.len() >= 2);
    pieces
}

impl Plot {
    pub fn from_scan(domain: Domain, scan: &Scan) -> Self {
        let mut markers: Vec<Marker> = scan
            .singularities
            .iter()
            .enumerate()
            .map(|(i, s)| Marker {
                index: i,
                uv: s.location,
                kind: Some(s.kind),
                label: format!("{i} {}", s.dtype().map_or("?", |d| d.name())),
            })
            .collect();
        let n = markers.len();
        markers.extend(scan.suspects.iter().enumerate().map(|(k, &uv)| Marker {
            index: n + k,
            uv,
            kind: None,
            label: format!("{} ?", n + k),
        }));
        Plot {
            domain,
            markers,
            polylines: Vec::new(),
        }
    }

    pub fn from_configuration(domain: Domain, cfg: &Configuration) -> Self {
        let mut plot = Plot::from_scan(domain, &cfg.scan);
        let mut push = |kind, foliation, pts: &[[f64; 2]]| {
            let pieces = split_at_wraps(&domain, pts);
            if !pieces.is_empty() {
                plot.polylines.push(Polyline { kind, foliation, pieces });
            }
        };
        for l in &cfg.leaves {
            push(PolyKind::Leaf, l.trace.foliation, &l.trace.points);
        }
        for s in &cfg.separatrices {
            if let Ok(t) = &s.trace {
                push(PolyKind::Separatrix, t.foliation, &t.points);
            }
        }
        for c in &cfg.cycles {
            let mut pts: Vec<[f64; 2]> = c.samples.iter().map(|f| f.uv).collect();
            if let Some(&first) = pts.first() {
                pts.push(first);
            }
            push(PolyKind::Cycle, c.foliation, &pts);
        }
        plot
    }
}

/// Affine map from parameter space to SVG user units, `v` pointing up.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Viewport {
    pub width: f64,
    pub height: f64,
    pub margin: f64,
    pub u: [f64; 2],
    pub v: [f64; 2],
}

impl Viewport {
    pub fn new(domain: &Domain) -> Self {
        Viewport {
            width: 800.0,
            height: 600.0,
            margin: 40.0,
            u: [domain.u.lo, domain.u.hi],
            v: [domain.v.lo, domain.v.hi],
        }
    }

    pub fn map(&self, p: [f64; 2]) -> [f64; 2] {
        let sx = (self.width - 2.0 * self.margin) / (self.u[1] - self.u[0]);
        let sy = (self.height - 2.0 * self.margin) / (self.v[1] - self.v[0]);
        [self.margin + sx * (p[0] - self.u[0]), self.height - self.margin - sy * (p[1] - self.v[0])]
    }
}

fn style(kind: PolyKind, fol: Foliation) -> String {
    let (color, width) = match kind {
        PolyKind::Leaf => ("#444444", 0.6),
        PolyKind::Separatrix => ("#d62728", 1.8),
        PolyKind::Cycle => ("#1f77b4", 1.8),
    };
    let dash = match fol {
        Foliation::Minimal => "",
        Foliation::Maximal => r#" stroke-dasharray="4 3""#,
    };
    format!(r#"fill="none" stroke="{color}" stroke-width="{width}"{dash}"#)
}

/// Portrait of one foliation.
pub fn svg(plot: &Plot, fol: Foliation) -> String {
    let vp = Viewport::new(&plot.domain);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = vp.width,
        h = vp.height
    );
    let _ = writeln!(out, "<title>{} foliation</title>", fol.name());
    let a = vp.map([vp.u[0], vp.v[1]]);
    let b = vp.map([vp.u[1], vp.v[0]]);
    let _ = writeln!(
        out,
        r##"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="white" stroke="#999999" stroke-width="0.5"/>"##,
        a[0],
        a[1],
        b[0] - a[0],
        b[1] - a[1]
    );
    // Leaves below separatrices and cycles.
    for kind in [PolyKind::Leaf, PolyKind::Cycle, PolyKind::Separatrix] {
        for (id, pl) in plot.polylines.iter().enumerate() {
            if pl.kind != kind || pl.foliation != fol {
                continue;
            }
            for (k, piece) in pl.pieces.iter().enumerate() {
                let pts: Vec<String> = piece
                    .iter()
                    .map(|&p| {
                        let q = vp.map(p);
                        format!("{:.3},{:.3}", q[0], q[1])
                    })
                    .collect();
                let _ = writeln!(
                    out,
                    r#"<polyline class="{}" data-polyline="{id}" data-piece="{k}" {} points="{}"/>"#,
                    kind.name(),
                    style(kind, fol),
                    pts.join(" ")
                );
            }
        }
    }
    for m in &plot.markers {
        let q = vp.map(m.uv);
        let shape = match m.kind {
            Some(Kind::Umbilic) => format!(r#"<circle cx="{:.3}" cy="{:.3}" r="5" fill="black"/>"#, q[0], q[1]),
            Some(Kind::Normal) => format!(r#"<rect x="{:.3}" y="{:.3}" width="9" height="9" fill="black"/>"#, q[0] - 4.5, q[1] - 4.5),
            Some(Kind::Degenerate) => {
                format!(r#"<rect x="{:.3}" y="{:.3}" width="9" height="9" fill="none" stroke="black"/>"#, q[0] - 4.5, q[1] - 4.5)
            }
            None => format!(r#"<circle cx="{:.3}" cy="{:.3}" r="4" fill="none" stroke="black"/>"#, q[0], q[1]),
        };
        let _ = writeln!(out, r#"<g class="singularity" data-index="{}">{shape}"#, m.index);
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="11">{}</text></g>"#,
            q[0] + 7.0,
            q[1] - 7.0,
            m.label
        );
    }
    out.push_str("</svg>\n");
    out
}

/// One row per vertex: `polyline, piece, kind, foliation, u, v`.
pub fn csv(plot: &Plot) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["polyline", "piece", "kind", "foliation", "u", "v"])?;
    for (id, pl) in plot.polylines.iter().enumerate() {
        for (k, piece) in pl.pieces.iter().enumerate() {
            for p in piece {
                w.write_record([
                    id.to_string(),
                    k.to_string(),
                    pl.kind.name().to_string(),
                    pl.foliation.name().to_string(),
                    p[0].to_string(),
                    p[1].to_string(),
                ])?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
