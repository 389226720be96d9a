//! Distance-to-property estimation from weak-regular partition signatures,
//! with exhaustive reference oracles for small graphs.

pub mod error;
pub mod estimator;
pub mod final_partition;
pub mod graph;
pub mod homstats;
pub mod metrics;
pub mod oracle;
pub mod regularity;
pub mod rng;
pub mod rounding;
pub mod signature;
pub mod suite;

pub use error::{Error, Result};
pub use estimator::{
    estimate_general, estimate_hereditary, extensions_of, general_certificates, hereditary_certificates,
    pipeline_general, pipeline_hereditary, Case, EstimatorParams, OracleKind, PipelineOptions, PipelineReport,
    Verdict, Witness,
};
pub use final_partition::{
    find_final, is_final, signature_search, max_index, ExactOracle, FinalSearchParams, PartitionOracle, QueryCounts,
    SampledOracle, SearchOutcome,
};
pub use graph::{
    blowup, canonical_equipartition, density, edit_distance, enumerate_equipartitions, is_refinement, Equipartition,
    Graph, PairWeights, VertexSet, WeightedGraph,
};
pub use homstats::{ind_induced, ind_prime, perceived_q_statistic, q_statistic, LabeledGraphCode};
pub use metrics::{d1, d_box, d_box_ordered, variation_distance, GraphDistribution};
pub use oracle::{canonical_test, dist_oracle, PropertySpec, QueryCountingOracle};
pub use regularity::{fk_irregularity, fk_refine, fk_star_irregularity, Irregularity, RefineOutcome, RefinementStep};
pub use rounding::{randomized_round, RoundingReport};
pub use signature::{
    index_of_partition, index_of_property, property_distance, signature_check, zero_signature, PartitionProperty,
    Signature,
};
pub use suite::{run_suite, ExperimentRecord, Scenario, SuiteConfig};
