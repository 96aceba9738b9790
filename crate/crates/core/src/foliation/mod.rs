//! Principal mean foliations: leaf tracing, cycles and their holonomy, and
//! the assembled configuration.

mod configuration;
mod cycle;
mod holonomy;
mod trace;

pub use configuration::{build_configuration, Checklist, ConfigError, ConfigOptions, Configuration, LeafRecord, LimitSet, Seeding, SeparatrixRecord};
pub use cycle::{refine_closure, sample_cycle, CycleError, CyclePoint, ReturnMap};
pub use holonomy::{
    auto_delta, compute_holonomy, cycle_from_map, default_offset, deformation_derivative, detect_cycle, darboux_terms, frame_at, holonomy_frame,
    holonomy_darboux, holonomy_darboux_alt, holonomy_numeric, perturbation_derivative, Cycle, CycleIdentities, FrameSample,
    Holonomy,
};
pub use trace::{surface_scale, trace_leaf, LeafTrace, Origin, Return, Termination, Tracer};
