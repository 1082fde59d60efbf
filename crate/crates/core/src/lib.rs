//! Cardiac severity pipeline.
//!
//! Ingests heart-disease records in the 76-attribute raw exchange format (or
//! the 14-column processed variant), removes unusable and irrelevant symptoms
//! with a filter stage, searches an accuracy-driven subset with a wrapper
//! stage, ranks the surviving symptoms by an entropy-based significance index,
//! and classifies patients into five severity classes (absence, starting,
//! mild, moderate, serious) with a Laplace-smoothed naive Bayes model. A
//! blackboard orchestrator runs the stages as cooperating agents and a
//! cross-validation harness reports distributions, rankings and metrics.
//!
//! Everything is deterministic under a fixed seed: two runs with the same
//! inputs produce byte-identical reports and manifests.

pub mod blackboard;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod nbc;
pub mod preprocess;
pub mod report;
pub mod significance;
pub mod synth;

pub use error::CoreError;
pub use ingest::{
    class_distribution, label_of, labeled_distribution, parse_processed, parse_raw,
    read_processed_file, read_raw_file, serialize_processed, serialize_raw, AttrId,
    AttributeKind, AttributeRole, AttributeSchema, ClassLabel, Dataset, IngestError,
    PatientRecord, ATTRIBUTE_COUNT, CLASS_COUNT, LABEL_ATTR,
};
pub use preprocess::{
    count_retained_per_record, discretize, drop_unusable, filter_select, symmetric_uncertainty,
    wrapper_select, AttrBins, DiscretizedView, FeatureSubset, RemovalReason, SelectError,
    SelectionConfig, SuTarget, WrapperTrace,
};
pub use significance::{
    entropy, mutual_information, prior_entropy, rank_symptoms, significance, EstimationMode,
    LabelCollapse, MiMode, ProbabilityTable, Ranking, SignificanceError, SignificanceMode,
    SignificanceScore,
};
pub use nbc::{
    builtin_table6, fit, load_prior_table, read_model, seed_model_from_table, write_model,
    NbcError, NbcModel, Posterior, PriorTable,
};
pub use eval::{
    cross_validate_with, evaluate, stratified_kfold, ConfusionMatrix, EvalError, Evaluation,
    FoldPlan, Metrics,
};
pub use blackboard::{
    run_pipeline, AgentId, AgentSpec, Artifact, ArtifactKind, Blackboard, BlackboardError,
    Payload, PipelineConfig, PipelineOutcome, RunManifest,
};
pub use report::{emit_tables, Report, ReportDocument};
