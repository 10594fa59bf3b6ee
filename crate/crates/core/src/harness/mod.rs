//! Program generation, property suites and counterexample minimisation.

mod gen;
mod minimize;
mod props;

pub use gen::{gen_typed, gen_typed_counted, GenConfig, Weights};
pub use minimize::minimize;
pub use props::{
    case_seed, check_confluence, check_progress, check_roundtrip, check_simulation_property,
    check_subject_reduction, check_termination, prop_confluence, prop_progress, prop_roundtrip,
    prop_simulation, prop_subject_reduction, prop_termination, run_property, Failure, Property,
    PropertyResult, STATE_BUDGET, STEP_BUDGET, SUBJECT_REDUCTION_STEPS,
};
