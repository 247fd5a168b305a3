//! Instance corpus, verification driver, report emission, and the bundled
//! self-test corpus.

pub mod generate;
pub mod instance;
pub mod report;
pub mod runner;

pub use generate::{gen_minimizer, gen_program, gen_random, GenBounds};
pub use instance::{
    FormulaId, FunctionEntry, FunctionSpec, Instance, InstanceFile, MetaInfo, PieceSpec, Query,
    QueryKind, QuerySpec, WeightChoice,
};
pub use report::{CheckReport, NamedSet, QueryReport, Report, Status};
pub use runner::{default_workers, run_instance, RunConfig};

/// The bundled corpus shipped inside the binary, as (name, JSON) pairs.
pub fn bundled_corpus() -> Vec<(&'static str, &'static str)> {
    vec![
        ("abs", include_str!("../../instances/abs.json")),
        ("indicator", include_str!("../../instances/indicator.json")),
        (
            "nonminimizer",
            include_str!("../../instances/nonminimizer.json"),
        ),
        ("corner", include_str!("../../instances/corner.json")),
        ("pospart", include_str!("../../instances/pospart.json")),
        ("halfplane", include_str!("../../instances/halfplane.json")),
        ("singleton", include_str!("../../instances/singleton.json")),
        ("brondsted", include_str!("../../instances/brondsted.json")),
        ("affine", include_str!("../../instances/affine.json")),
        (
            "program_basic",
            include_str!("../../instances/program_basic.json"),
        ),
        (
            "program_two",
            include_str!("../../instances/program_two.json"),
        ),
    ]
}
