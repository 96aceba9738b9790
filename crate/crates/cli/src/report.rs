//! Serializable report of a run.

use meanfol::foliation::{Configuration, Cycle, LeafTrace, LimitSet};
use meanfol::liecartan::{Chart, Equilibrium};
use meanfol::singularities::{Scan, Singularity};
use meanfol::{SurfaceDef, Tolerances};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// `None` for non-finite values, which JSON cannot carry.
pub fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub surface: SurfaceEcho,
    pub grid: usize,
    pub tolerances: Vec<(String, f64)>,
    pub singularities: Vec<SingularityRow>,
    /// Grid cells flagged by the sign test whose Newton refinement failed.
    pub suspects: Vec<[f64; 2]>,
    pub separatrices: Vec<SeparatrixRow>,
    pub cycles: Vec<CycleRow>,
    pub leaves: Vec<LeafRow>,
    pub checklist: Option<ChecklistRow>,
    pub stats: Stats,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceEcho {
    pub source: String,
    pub definition: String,
    pub dim: usize,
    pub u: [f64; 2],
    pub v: [f64; 2],
    pub periodic: [bool; 2],
}

impl SurfaceEcho {
    pub fn new(source: &str, s: &SurfaceDef) -> Self {
        let d = s.domain();
        SurfaceEcho {
            source: source.to_string(),
            definition: s.to_source(),
            dim: s.dim(),
            u: [d.u.lo, d.u.hi],
            v: [d.v.lo, d.v.hi],
            periodic: [d.u.periodic, d.v.periodic],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularityRow {
    pub index: usize,
    pub location: [f64; 2],
    pub kind: String,
    pub dtype: Option<String>,
    pub h_norm: Option<f64>,
    pub residual: Option<f64>,
    /// Monge coefficients `r s t a b c d` of `h₁` then `h₂`.
    pub coeffs: Option<Vec<f64>>,
    pub linear: Option<[f64; 4]>,
    pub omega: Option<f64>,
    pub rotated: Option<[f64; 4]>,
    pub transversality: Option<f64>,
    pub discriminant: Option<f64>,
    pub ratio: Option<f64>,
    pub reason: Option<String>,
    pub equilibria: Vec<EquilibriumRow>,
    pub equilibria_error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumRow {
    pub chart: String,
    pub slope: f64,
    pub direction: [f64; 2],
    pub eigenvalues: [Option<f64>; 3],
    pub class: String,
}

fn arr4(a: [f64; 4]) -> Option<[f64; 4]> {
    a.iter().all(|x| x.is_finite()).then_some(a)
}

impl EquilibriumRow {
    pub fn new(e: &Equilibrium) -> Self {
        EquilibriumRow {
            chart: match e.point.chart {
                Chart::P => "p".into(),
                Chart::Q => "q".into(),
            },
            slope: e.point.slope,
            direction: e.point.direction(),
            eigenvalues: e.eigenvalues.map(finite),
            class: e.class.name().into(),
        }
    }
}

impl SingularityRow {
    pub fn new(index: usize, s: &Singularity, eqs: &Result<Vec<Equilibrium>, String>) -> Self {
        let c = s.classification.as_ref();
        SingularityRow {
            index,
            location: s.location,
            kind: s.kind.name().into(),
            dtype: s.dtype().map(|d| d.name().into()),
            h_norm: finite(s.h_norm),
            residual: finite(s.residual),
            coeffs: s.monge.as_ref().map(|m| m.coeffs.to_vec()),
            linear: c.and_then(|c| arr4(c.linear)),
            omega: c.and_then(|c| finite(c.omega)),
            rotated: c.and_then(|c| arr4(c.rotated)),
            transversality: c.and_then(|c| finite(c.transversality)),
            discriminant: c.and_then(|c| finite(c.discriminant)),
            ratio: c.and_then(|c| finite(c.ratio)),
            reason: c.and_then(|c| c.reason.clone()),
            equilibria: eqs.as_ref().map(|v| v.iter().map(EquilibriumRow::new).collect()).unwrap_or_default(),
            equilibria_error: eqs.as_ref().err().cloned(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Limit {
    pub kind: String,
    pub index: Option<usize>,
}

impl Limit {
    pub fn new(l: &LimitSet) -> Self {
        Limit {
            kind: l.name().into(),
            index: match l {
                LimitSet::Singularity(i) | LimitSet::Cycle(i) => Some(*i),
                _ => None,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparatrixRow {
    pub singularity: usize,
    pub equilibrium: usize,
    pub branch: i8,
    pub foliation: Option<String>,
    pub length: Option<f64>,
    pub steps: usize,
    pub termination: Option<String>,
    pub limit: Limit,
    /// Index of the singularity joined by a separatrix connection.
    pub connection: Option<usize>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    /// `−∮ τ δ / (H̃₁ (K − k)) du` with `δ = −τ H̃₁`.
    pub closed_form: Option<f64>,
    /// Derivative of `ln π′` along the deformation `α + ε δ v³/6 B`.
    pub deformation: Option<f64>,
    pub torsion_squared: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleRow {
    pub index: usize,
    pub foliation: String,
    pub basepoint: [f64; 2],
    pub length: Option<f64>,
    pub gap: Option<f64>,
    pub quadrature_nodes: usize,
    pub ln_numeric: Option<f64>,
    pub ln_numeric_error: Option<f64>,
    pub ln_frame: Option<f64>,
    pub ln_frame_doubled: Option<f64>,
    pub ln_minimal_formula: Option<f64>,
    pub ln_minimal_formula_alt: Option<f64>,
    pub hyperbolic: Option<bool>,
    pub quadrature_ok: Option<bool>,
    pub max_tau_n: Option<f64>,
    pub max_kb_plus_kbar: Option<f64>,
    pub min_curvature_gap: Option<f64>,
    pub perturbation: Option<Perturbation>,
}

impl CycleRow {
    pub fn new(index: usize, c: &Cycle, perturb: bool) -> Self {
        let h = c.holonomy.as_ref();
        let id = c.identities();
        let perturbation = perturb.then(|| {
            let delta = meanfol::foliation::auto_delta(c);
            Perturbation {
                closed_form: finite(meanfol::foliation::perturbation_derivative(c, &delta)),
                deformation: finite(meanfol::foliation::deformation_derivative(c, &delta)),
                torsion_squared: finite(c.integrate(|f| f.tau * f.tau)),
            }
        });
        CycleRow {
            index,
            foliation: c.foliation.name().into(),
            basepoint: c.basepoint,
            length: finite(c.length),
            gap: finite(c.gap),
            quadrature_nodes: c.samples.len(),
            ln_numeric: h.and_then(|h| h.numeric).and_then(|n| finite(n.0)),
            ln_numeric_error: h.and_then(|h| h.numeric).and_then(|n| finite(n.1)),
            ln_frame: h.and_then(|h| finite(h.frame)),
            ln_frame_doubled: h.and_then(|h| finite(h.frame_doubled)),
            ln_minimal_formula: h.and_then(|h| h.darboux).and_then(finite),
            ln_minimal_formula_alt: h.and_then(|h| h.darboux_alt).and_then(finite),
            hyperbolic: h.map(|h| h.hyperbolic),
            quadrature_ok: h.map(|h| h.quadrature_ok),
            max_tau_n: finite(id.max_tau_n),
            max_kb_plus_kbar: finite(id.max_kb_plus_kbar),
            min_curvature_gap: finite(id.min_gap),
            perturbation,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeafRow {
    pub seed: [f64; 2],
    pub foliation: String,
    pub orient: i8,
    pub length: Option<f64>,
    pub steps: usize,
    pub termination: String,
    pub limit: Limit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChecklistRow {
    pub all_darbouxian: bool,
    pub all_hyperbolic: bool,
    pub no_connections: bool,
    pub trivial_limit_sets: bool,
    pub holds: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub leaves: usize,
    pub separatrices: usize,
    pub steps: usize,
    /// Leaf counts per termination, in a fixed order.
    pub terminations: Vec<(String, usize)>,
}

const TERMINATIONS: [&str; 6] = ["hit-singularity", "left-domain", "closed", "recurrent", "step-limit", "aborted"];

fn steps(t: &LeafTrace) -> usize {
    t.points.len().saturating_sub(1)
}

impl Report {
    pub fn new(command: &str, source: &str, surface: &SurfaceDef, grid: usize, tol: &Tolerances) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            surface: SurfaceEcho::new(source, surface),
            grid,
            tolerances: tol.entries().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            singularities: Vec::new(),
            suspects: Vec::new(),
            separatrices: Vec::new(),
            cycles: Vec::new(),
            leaves: Vec::new(),
            checklist: None,
            stats: Stats::default(),
        }
    }

    pub fn set_scan(&mut self, scan: &Scan, equilibria: &[Result<Vec<Equilibrium>, String>]) {
        self.singularities = scan
            .singularities
            .iter()
            .zip(equilibria)
            .enumerate()
            .map(|(i, (s, e))| SingularityRow::new(i, s, e))
            .collect();
        self.suspects = scan.suspects.clone();
    }

    pub fn set_configuration(&mut self, cfg: &Configuration, perturb: bool) {
        self.set_scan(&cfg.scan, &cfg.equilibria);
        self.separatrices = cfg
            .separatrices
            .iter()
            .map(|s| {
                let tr = s.trace.as_ref().ok();
                SeparatrixRow {
                    singularity: s.singularity,
                    equilibrium: s.equilibrium,
                    branch: s.branch,
                    foliation: tr.map(|t| t.foliation.name().into()),
                    length: tr.and_then(|t| finite(t.length())),
                    steps: tr.map(steps).unwrap_or(0),
                    termination: tr.map(|t| t.termination.name().into()),
                    limit: Limit::new(&s.limit),
                    connection: s.connection,
                    error: s.trace.as_ref().err().cloned(),
                }
            })
            .collect();
        self.cycles = cfg.cycles.iter().enumerate().map(|(i, c)| CycleRow::new(i, c, perturb)).collect();
        self.leaves = cfg
            .leaves
            .iter()
            .map(|l| LeafRow {
                seed: l.seed,
                foliation: l.trace.foliation.name().into(),
                orient: l.orient,
                length: finite(l.trace.length()),
                steps: steps(&l.trace),
                termination: l.trace.termination.name().into(),
                limit: Limit::new(&l.limit),
            })
            .collect();
        let c = &cfg.checklist;
        self.checklist = Some(ChecklistRow {
            all_darbouxian: c.all_darbouxian,
            all_hyperbolic: c.all_hyperbolic,
            no_connections: c.no_connections,
            trivial_limit_sets: c.trivial_limit_sets,
            holds: c.holds(),
        });
        let traces = cfg.leaves.iter().map(|l| &l.trace).chain(cfg.separatrices.iter().filter_map(|s| s.trace.as_ref().ok()));
        let mut counts = [0usize; 6];
        let mut total = 0;
        for t in traces {
            total += steps(t);
            let k = TERMINATIONS.iter().position(|n| *n == t.termination.name()).unwrap_or(5);
            counts[k] += 1;
        }
        self.stats = Stats {
            leaves: cfg.leaves.len(),
            separatrices: cfg.separatrices.len(),
            steps: total,
            terminations: TERMINATIONS.iter().zip(counts).map(|(n, c)| (n.to_string(), c)).collect(),
        };
    }
}
