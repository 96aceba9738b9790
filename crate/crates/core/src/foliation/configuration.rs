//! The principal mean configuration: singularities, separatrices, cycles
//! and the limit sets of sampled leaves.

use rayon::prelude::*;

use super::holonomy::{compute_holonomy, detect_cycle, Cycle};
use super::trace::{trace_leaf, LeafTrace, Termination};
use crate::config::Tolerances;
use crate::expr::SurfaceDef;
use crate::geometry::Foliation;
use crate::liecartan::{arrives_on_separatrix, fiber_equilibria, trace_separatrix, EqClass, Equilibrium};
use crate::singularities::{find_singularities, Scan};

/// Where leaves are started.
#[derive(Clone, Debug, PartialEq)]
pub enum Seeding {
    /// Cell centers of an `n × n` grid over the domain.
    Grid(usize),
    List(Vec<[f64; 2]>),
    None,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigOptions {
    /// Cells per side of the singularity grid.
    pub grid: usize,
    pub seeding: Seeding,
    /// Refine closed leaves into cycles and compute their holonomy.
    pub cycles: bool,
}

impl Default for ConfigOptions {
    fn default() -> Self {
        ConfigOptions {
            grid: 64,
            seeding: Seeding::Grid(12),
            cycles: true,
        }
    }
}

/// Where a traced leaf ends up.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LimitSet {
    Singularity(usize),
    Boundary,
    Cycle(usize),
    /// Closed leaf, not refined into a cycle.
    Closed,
    /// Step budget exhausted, recurrence without a cycle, or a breakdown.
    Inconclusive,
}

impl LimitSet {
    pub fn name(&self) -> &'static str {
        match self {
            LimitSet::Singularity(_) => "singularity",
            LimitSet::Boundary => "boundary",
            LimitSet::Cycle(_) => "cycle",
            LimitSet::Closed => "closed",
            LimitSet::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LeafRecord {
    pub seed: [f64; 2],
    pub orient: i8,
    pub trace: LeafTrace,
    pub limit: LimitSet,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparatrixRecord {
    pub singularity: usize,
    pub equilibrium: usize,
    pub branch: i8,
    pub trace: Result<LeafTrace, String>,
    pub limit: LimitSet,
    /// Singularity reached along one of its own separatrices.
    pub connection: Option<usize>,
}

/// Structural stability conditions, each checked on what was found.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Checklist {
    pub all_darbouxian: bool,
    pub all_hyperbolic: bool,
    pub no_connections: bool,
    pub trivial_limit_sets: bool,
}

impl Checklist {
    pub fn holds(&self) -> bool {
        self.all_darbouxian && self.all_hyperbolic && self.no_connections && self.trivial_limit_sets
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    pub scan: Scan,
    /// Fiber equilibria per singularity.
    pub equilibria: Vec<Result<Vec<Equilibrium>, String>>,
    pub separatrices: Vec<SeparatrixRecord>,
    pub cycles: Vec<Cycle>,
    pub leaves: Vec<LeafRecord>,
    pub checklist: Checklist,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("every sampled point is singular; the surface has no principal configuration")]
    GloballyDegenerate,
}

fn end_tangent(trace: &LeafTrace) -> [f64; 2] {
    trace.tangents.last().copied().unwrap_or([0.0, 0.0])
}

fn limit_of(trace: &LeafTrace, n_sing: usize) -> LimitSet {
    match trace.termination {
        Termination::HitSingularity(i) if i < n_sing => LimitSet::Singularity(i),
        Termination::LeftDomain => LimitSet::Boundary,
        Termination::Closed => LimitSet::Closed,
        _ => LimitSet::Inconclusive,
    }
}

/// Distance from `p` to the closed polyline through the samples of `c`.
fn distance_to_cycle(surface: &SurfaceDef, c: &Cycle, p: [f64; 2]) -> f64 {
    let dom = surface.domain();
    let n = c.samples.len();
    (0..n)
        .map(|i| {
            let a = c.samples[i].uv;
            let b = dom.delta(a, c.samples[(i + 1) % n].uv);
            let q = dom.delta(a, p);
            let bb = b[0] * b[0] + b[1] * b[1];
            let t = if bb > 0.0 { ((q[0] * b[0] + q[1] * b[1]) / bb).clamp(0.0, 1.0) } else { 0.0 };
            (q[0] - t * b[0]).hypot(q[1] - t * b[1])
        })
        .fold(f64::INFINITY, f64::min)
}

fn same_cycle(surface: &SurfaceDef, a: &Cycle, b: &Cycle) -> bool {
    a.foliation == b.foliation
        && (a.length - b.length).abs() <= 1e-6 * a.length
        && distance_to_cycle(surface, a, b.basepoint) <= 1e-4 * surface.domain().diameter()
}

/// Builds the configuration: singularity scan, separatrices of every
/// saddle, and both orientations of both foliations through every seed,
/// with cycle detection and holonomy when `opts.cycles` is set.
pub fn build_configuration(surface: &SurfaceDef, opts: &ConfigOptions, tol: &Tolerances) -> Result<Configuration, ConfigError> {
    let scan = find_singularities(surface, opts.grid, tol);
    log::info!("{} singularities, {} suspect cells", scan.singularities.len(), scan.suspects.len());
    if scan.globally_degenerate {
        return Err(ConfigError::GloballyDegenerate);
    }
    let n_sing = scan.singularities.len();
    let mut singular: Vec<[f64; 2]> = scan.singularities.iter().map(|s| s.location).collect();
    singular.extend(scan.suspects.iter().copied());

    let equilibria: Vec<Result<Vec<Equilibrium>, String>> = scan
        .singularities
        .par_iter()
        .map(|s| fiber_equilibria(surface, s.location, tol).map_err(|e| e.to_string()))
        .collect();

    let jobs: Vec<(usize, usize, i8)> = equilibria
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.as_ref().ok().map(|eqs| (i, eqs)))
        .flat_map(|(i, eqs)| {
            eqs.iter()
                .enumerate()
                .filter(|(_, e)| e.class == EqClass::Saddle)
                .flat_map(move |(j, _)| [(i, j, -1), (i, j, 1)])
        })
        .collect();
    let separatrices: Vec<SeparatrixRecord> = jobs
        .par_iter()
        .map(|&(i, j, branch)| {
            let eq = &equilibria[i].as_ref().expect("filtered")[j];
            let trace = trace_separatrix(surface, eq, branch, &singular, i, j, tol).map_err(|e| e.to_string());
            let (limit, connection) = match &trace {
                Ok(t) => {
                    let limit = limit_of(t, n_sing);
                    let connection = match limit {
                        LimitSet::Singularity(k) => match &equilibria[k] {
                            Ok(eqs) if arrives_on_separatrix(eqs, end_tangent(t)) => Some(k),
                            _ => None,
                        },
                        _ => None,
                    };
                    (limit, connection)
                }
                Err(_) => (LimitSet::Inconclusive, None),
            };
            SeparatrixRecord {
                singularity: i,
                equilibrium: j,
                branch,
                trace,
                limit,
                connection,
            }
        })
        .collect();

    let dom = *surface.domain();
    let clear = tol.r_exit();
    let points: Vec<[f64; 2]> = match &opts.seeding {
        Seeding::Grid(n) => (0..*n)
            .flat_map(|i| {
                (0..*n).map(move |j| {
                    [
                        dom.u.lo + dom.u.len() * (i as f64 + 0.5) / *n as f64,
                        dom.v.lo + dom.v.len() * (j as f64 + 0.5) / *n as f64,
                    ]
                })
            })
            .collect(),
        Seeding::List(v) => v.clone(),
        Seeding::None => Vec::new(),
    };
    let mut seeds = Vec::new();
    for p in points {
        if singular.iter().all(|q| dom.distance(p, *q) > clear) {
            for fol in [Foliation::Minimal, Foliation::Maximal] {
                for orient in [1i8, -1] {
                    seeds.push((p, fol, orient));
                }
            }
        }
    }
    log::info!("tracing {} leaves", seeds.len());
    let traced: Vec<(LeafRecord, Option<Cycle>)> = seeds
        .par_iter()
        .map(|&(seed, fol, orient)| {
            let trace = trace_leaf(surface, seed, fol, f64::from(orient), tol, &singular);
            let closes = matches!(trace.termination, Termination::Closed | Termination::Recurrent);
            let cycle = if opts.cycles && closes {
                match detect_cycle(surface, &trace, tol, &singular) {
                    Ok(c) => Some(c),
                    Err(e) => {
                        log::debug!("no cycle from seed {seed:?} ({fol:?}, {orient}): {e}");
                        None
                    }
                }
            } else {
                None
            };
            let mut limit = limit_of(&trace, n_sing);
            if opts.cycles && limit == LimitSet::Closed {
                limit = LimitSet::Inconclusive;
            }
            (LeafRecord { seed, orient, trace, limit }, cycle)
        })
        .collect();

    let mut cycles: Vec<Cycle> = Vec::new();
    let mut leaves = Vec::with_capacity(traced.len());
    for (mut leaf, cycle) in traced {
        if let Some(c) = cycle {
            let k = match cycles.iter().position(|d| same_cycle(surface, d, &c)) {
                Some(k) => k,
                None => {
                    cycles.push(c);
                    cycles.len() - 1
                }
            };
            leaf.limit = LimitSet::Cycle(k);
        }
        leaves.push(leaf);
    }
    log::info!("computing holonomy of {} cycles", cycles.len());
    cycles.par_iter_mut().for_each(|c| compute_holonomy(surface, c, tol));

    let checklist = Checklist {
        all_darbouxian: scan.suspects.is_empty() && scan.singularities.iter().all(|s| s.dtype().is_some()),
        all_hyperbolic: cycles.iter().all(|c| c.holonomy.as_ref().is_some_and(|h| h.hyperbolic)),
        no_connections: separatrices.iter().all(|s| s.connection.is_none()),
        trivial_limit_sets: leaves.iter().all(|l| l.limit != LimitSet::Inconclusive)
            && separatrices.iter().all(|s| s.limit != LimitSet::Inconclusive),
    };
    Ok(Configuration {
        scan,
        equilibria,
        separatrices,
        cycles,
        leaves,
        checklist,
    })
}
