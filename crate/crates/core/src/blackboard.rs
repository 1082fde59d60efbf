//! Write-once blackboard orchestration of the pipeline stages.
//!
//! Stages are agents: each declares the artifact kinds it reads, the single
//! kind it writes, and a transformation. The board stores artifacts keyed by
//! (kind, version), rejects overwrites, and refuses agent registrations that
//! would make the kind-level reads-to-writes graph cyclic (an agent reading
//! its own output kind is the smallest such cycle). Execution is topological:
//! an agent runs once every kind it reads has been posted. Runs are
//! deterministic end to end; the manifest records the input and output
//! digests of every step so a replay can be checked digest by digest.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};

use crate::error::CoreError;
use crate::eval::{self, Evaluation};
use crate::ingest::Dataset;
use crate::nbc::{self, NbcModel};
use crate::preprocess::{
    discretize, filter_select, wrapper_select, DiscretizedView, FeatureSubset, SelectionConfig,
    WrapperTrace,
};
use crate::report::Report;
use crate::significance::{LabelCollapse, MiMode, Ranking};

#[derive(Debug, thiserror::Error)]
pub enum BlackboardError {
    #[error("agent {0} is already registered")]
    DuplicateAgent(AgentId),
    #[error("registering agent {0} would make the artifact dependency graph cyclic")]
    CyclicDependency(AgentId),
    #[error("artifact {kind} v{version} is already posted")]
    WriteConflict { kind: ArtifactKind, version: u32 },
    #[error("no artifact of kind {0} on the board")]
    MissingArtifact(ArtifactKind),
    #[error("agents {0:?} can never run: their read kinds are never produced")]
    Stalled(Vec<AgentId>),
    #[error("agent {agent} failed: {source}")]
    AgentFailure {
        agent: AgentId,
        #[source]
        source: CoreError,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(pub String);

impl AgentId {
    pub fn new(id: impl Into<String>) -> Self {
        AgentId(id.into())
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Artifact taxonomy. The two selection stages write distinct kinds so the
/// filter-to-wrapper chain stays acyclic at the kind level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArtifactKind {
    Dataset,
    FilterSubset,
    WrapperSubset,
    Ranking,
    Model,
    Report,
}

impl ArtifactKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ArtifactKind::Dataset => "dataset",
            ArtifactKind::FilterSubset => "filter_subset",
            ArtifactKind::WrapperSubset => "wrapper_subset",
            ArtifactKind::Ranking => "ranking",
            ArtifactKind::Model => "model",
            ArtifactKind::Report => "report",
        }
    }
}

impl fmt::Display for ArtifactKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Immutable artifact payloads, shared by reference once posted.
#[derive(Debug, Clone)]
pub enum Payload {
    Dataset(Arc<Dataset>),
    FilterSubset(Arc<FeatureSubset>),
    WrapperSubset(Arc<FeatureSubset>, Arc<WrapperTrace>),
    Ranking(Arc<Ranking>),
    Model(Arc<NbcModel>),
    Report(Arc<Report>),
}

impl Payload {
    pub fn kind(&self) -> ArtifactKind {
        match self {
            Payload::Dataset(_) => ArtifactKind::Dataset,
            Payload::FilterSubset(_) => ArtifactKind::FilterSubset,
            Payload::WrapperSubset(..) => ArtifactKind::WrapperSubset,
            Payload::Ranking(_) => ArtifactKind::Ranking,
            Payload::Model(_) => ArtifactKind::Model,
            Payload::Report(_) => ArtifactKind::Report,
        }
    }

    /// Canonical bytes for digesting: each payload serializes through its
    /// stable text form.
    fn canonical_bytes(&self) -> Vec<u8> {
        match self {
            Payload::Dataset(dataset) => {
                let mut bytes = dataset.name.clone().into_bytes();
                bytes.push(b'\n');
                bytes.extend(crate::ingest::serialize_raw(dataset).into_bytes());
                bytes
            }
            Payload::FilterSubset(subset) => {
                subset.to_csv(&crate::ingest::AttributeSchema::heart76()).into_bytes()
            }
            Payload::WrapperSubset(subset, trace) => {
                let mut bytes =
                    subset.to_csv(&crate::ingest::AttributeSchema::heart76()).into_bytes();
                bytes.extend(format!("baseline,{}\n", trace.baseline).into_bytes());
                for step in &trace.steps {
                    bytes.extend(format!("step,{},{}\n", step.attr, step.accuracy).into_bytes());
                }
                bytes
            }
            Payload::Ranking(ranking) => {
                let schema = crate::ingest::AttributeSchema::heart76();
                let mut bytes =
                    crate::significance::ranking_to_csv(&ranking.standard, &schema).into_bytes();
                bytes.extend(
                    crate::significance::ranking_to_csv(&ranking.literal, &schema).into_bytes(),
                );
                bytes
            }
            Payload::Model(model) => nbc::write_model(model).into_bytes(),
            Payload::Report(report) => {
                report.render_text(&crate::ingest::AttributeSchema::heart76()).into_bytes()
            }
        }
    }
}

/// An immutable posted artifact.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub kind: ArtifactKind,
    pub version: u32,
    pub producer: AgentId,
    pub digest: String,
    pub payload: Payload,
}

/// What an agent's transformation can see.
pub struct AgentContext<'a> {
    pub board: &'a Blackboard,
    pub view: &'a DiscretizedView,
    pub config: &'a PipelineConfig,
}

impl AgentContext<'_> {
    pub fn dataset(&self) -> Result<&Arc<Dataset>, BlackboardError> {
        match &self.board.latest(ArtifactKind::Dataset)?.payload {
            Payload::Dataset(dataset) => Ok(dataset),
            _ => unreachable!("kind/payload mismatch"),
        }
    }

    pub fn filter_subset(&self) -> Result<&Arc<FeatureSubset>, BlackboardError> {
        match &self.board.latest(ArtifactKind::FilterSubset)?.payload {
            Payload::FilterSubset(subset) => Ok(subset),
            _ => unreachable!("kind/payload mismatch"),
        }
    }

    pub fn wrapper_subset(&self) -> Result<(&Arc<FeatureSubset>, &Arc<WrapperTrace>), BlackboardError> {
        match &self.board.latest(ArtifactKind::WrapperSubset)?.payload {
            Payload::WrapperSubset(subset, trace) => Ok((subset, trace)),
            _ => unreachable!("kind/payload mismatch"),
        }
    }

    pub fn ranking(&self) -> Result<&Arc<Ranking>, BlackboardError> {
        match &self.board.latest(ArtifactKind::Ranking)?.payload {
            Payload::Ranking(ranking) => Ok(ranking),
            _ => unreachable!("kind/payload mismatch"),
        }
    }

    pub fn model(&self) -> Result<&Arc<NbcModel>, BlackboardError> {
        match &self.board.latest(ArtifactKind::Model)?.payload {
            Payload::Model(model) => Ok(model),
            _ => unreachable!("kind/payload mismatch"),
        }
    }
}

type AgentRun = Box<dyn Fn(&AgentContext<'_>) -> Result<Payload, CoreError> + Send + Sync>;

/// A pipeline stage: reads some artifact kinds, writes exactly one.
pub struct AgentSpec {
    pub id: AgentId,
    pub reads: Vec<ArtifactKind>,
    pub writes: ArtifactKind,
    pub run: AgentRun,
}

impl fmt::Debug for AgentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AgentSpec")
            .field("id", &self.id)
            .field("reads", &self.reads)
            .field("writes", &self.writes)
            .finish_non_exhaustive()
    }
}

/// Knobs of a full pipeline run. `selection.seed` seeds everything.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub selection: SelectionConfig,
    /// Laplace smoothing of the final classifier.
    pub alpha: f64,
    /// Equal-frequency bin count for continuous attributes.
    pub bins: usize,
    /// Folds of the evaluation cross-validation.
    pub eval_folds: usize,
    pub mi_mode: MiMode,
    pub collapse: LabelCollapse,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            selection: SelectionConfig::default(),
            alpha: 1.0,
            bins: 4,
            eval_folds: 5,
            mi_mode: MiMode::Standard,
            collapse: LabelCollapse::Binary,
        }
    }
}

impl PipelineConfig {
    pub fn seed(&self) -> u64 {
        self.selection.seed
    }

    /// Canonical `key=value` pairs, sorted by key.
    pub fn snapshot(&self) -> Vec<(String, String)> {
        vec![
            ("alpha".into(), format!("{}", self.alpha)),
            ("bins".into(), format!("{}", self.bins)),
            ("eval_folds".into(), format!("{}", self.eval_folds)),
            ("i0_mode".into(), self.collapse.as_str().into()),
            ("mi_mode".into(), self.mi_mode.as_str().into()),
            ("missing_ratio_cap".into(), format!("{}", self.selection.missing_ratio_cap)),
            ("relevance_threshold".into(), format!("{}", self.selection.relevance_threshold)),
            ("seed".into(), format!("{}", self.selection.seed)),
            ("wrapper_epsilon".into(), format!("{}", self.selection.wrapper_epsilon)),
            ("wrapper_folds".into(), format!("{}", self.selection.wrapper_folds)),
        ]
    }
}

/// One executed step in the manifest.
#[derive(Debug, Clone)]
pub struct ManifestEntry {
    pub agent: AgentId,
    pub inputs: Vec<(ArtifactKind, String)>,
    pub output_kind: ArtifactKind,
    pub output_version: u32,
    pub output_digest: String,
    /// Wall time of the step; kept in memory only, never serialized, so
    /// manifests stay byte-identical across runs.
    pub wall: Duration,
}

/// Everything a pipeline run hands back.
#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub report: Arc<Report>,
    pub manifest: RunManifest,
    pub model: Arc<NbcModel>,
}

/// Replayable log of one pipeline run.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub dataset: String,
    pub seed: u64,
    pub config: Vec<(String, String)>,
    pub entries: Vec<ManifestEntry>,
}

impl RunManifest {
    /// Deterministic line-oriented form (wall times excluded).
    pub fn render_text(&self) -> String {
        let mut out = String::from("cardiopipe-manifest v1\n");
        out.push_str(&format!("dataset {}\n", self.dataset));
        out.push_str(&format!("seed {}\n", self.seed));
        let pairs: Vec<String> = self.config.iter().map(|(k, v)| format!("{k}={v}")).collect();
        out.push_str(&format!("config {}\n", pairs.join(" ")));
        for entry in &self.entries {
            let inputs: Vec<String> =
                entry.inputs.iter().map(|(kind, digest)| format!("{kind}:{digest}")).collect();
            out.push_str(&format!(
                "agent {} reads [{}] writes {} v{} {}\n",
                entry.agent,
                inputs.join(","),
                entry.output_kind,
                entry.output_version,
                entry.output_digest
            ));
        }
        out.push_str("end\n");
        out
    }

    pub fn digests(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.output_digest.clone()).collect()
    }
}

/// The shared write-once artifact store plus the registered agents.
#[derive(Default)]
pub struct Blackboard {
    artifacts: BTreeMap<(ArtifactKind, u32), Artifact>,
    agents: Vec<AgentSpec>,
}

impl Blackboard {
    pub fn new() -> Self {
        Self::default()
    }

    /// Register an agent. Fails on a duplicate id or when the kind-level
    /// dependency graph would gain a cycle.
    pub fn register_agent(&mut self, spec: AgentSpec) -> Result<(), BlackboardError> {
        if self.agents.iter().any(|a| a.id == spec.id) {
            return Err(BlackboardError::DuplicateAgent(spec.id));
        }
        if self.would_cycle(&spec) {
            return Err(BlackboardError::CyclicDependency(spec.id));
        }
        self.agents.push(spec);
        Ok(())
    }

    fn would_cycle(&self, candidate: &AgentSpec) -> bool {
        // kind-level edges read -> write over current agents plus the candidate
        let mut edges: Vec<(ArtifactKind, ArtifactKind)> = Vec::new();
        for agent in self.agents.iter() {
            for read in &agent.reads {
                edges.push((*read, agent.writes));
            }
        }
        for read in &candidate.reads {
            edges.push((*read, candidate.writes));
        }
        // depth-first search for a cycle
        fn reachable(
            from: ArtifactKind,
            target: ArtifactKind,
            edges: &[(ArtifactKind, ArtifactKind)],
            seen: &mut Vec<ArtifactKind>,
        ) -> bool {
            if seen.contains(&from) {
                return false;
            }
            seen.push(from);
            for (a, b) in edges {
                if *a == from && (*b == target || reachable(*b, target, edges, seen)) {
                    return true;
                }
            }
            false
        }
        let kinds: Vec<ArtifactKind> = edges.iter().flat_map(|(a, b)| [*a, *b]).collect();
        for kind in kinds {
            let mut seen = Vec::new();
            if reachable(kind, kind, &edges, &mut seen) {
                return true;
            }
        }
        false
    }

    pub fn agents(&self) -> &[AgentSpec] {
        &self.agents
    }

    /// Post an artifact; the (kind, version) slot must be free.
    pub fn post(&mut self, producer: AgentId, payload: Payload) -> Result<&Artifact, BlackboardError> {
        let kind = payload.kind();
        let version = self.next_version(kind);
        self.post_versioned(producer, payload, version)
    }

    fn post_versioned(
        &mut self,
        producer: AgentId,
        payload: Payload,
        version: u32,
    ) -> Result<&Artifact, BlackboardError> {
        let kind = payload.kind();
        if self.artifacts.contains_key(&(kind, version)) {
            return Err(BlackboardError::WriteConflict { kind, version });
        }
        let digest = hex_digest(&payload.canonical_bytes());
        let artifact = Artifact { kind, version, producer, digest, payload };
        Ok(self.artifacts.entry((kind, version)).or_insert(artifact))
    }

    pub fn next_version(&self, kind: ArtifactKind) -> u32 {
        self.artifacts
            .range((kind, 0)..=(kind, u32::MAX))
            .next_back()
            .map(|((_, v), _)| v + 1)
            .unwrap_or(1)
    }

    pub fn latest(&self, kind: ArtifactKind) -> Result<&Artifact, BlackboardError> {
        self.artifacts
            .range((kind, 0)..=(kind, u32::MAX))
            .next_back()
            .map(|(_, artifact)| artifact)
            .ok_or(BlackboardError::MissingArtifact(kind))
    }

    pub fn artifacts(&self) -> impl Iterator<Item = &Artifact> {
        self.artifacts.values()
    }

    fn has(&self, kind: ArtifactKind) -> bool {
        self.latest(kind).is_ok()
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// The four standard agents in registration order.
pub fn standard_agents() -> Vec<AgentSpec> {
    vec![
        AgentSpec {
            id: AgentId::new("filter"),
            reads: vec![ArtifactKind::Dataset],
            writes: ArtifactKind::FilterSubset,
            run: Box::new(|ctx| {
                let dataset = ctx.dataset().expect("filter reads the dataset");
                let subset = filter_select(dataset, ctx.view, &ctx.config.selection)?;
                Ok(Payload::FilterSubset(Arc::new(subset)))
            }),
        },
        AgentSpec {
            id: AgentId::new("wrapper"),
            reads: vec![ArtifactKind::Dataset, ArtifactKind::FilterSubset],
            writes: ArtifactKind::WrapperSubset,
            run: Box::new(|ctx| {
                let start = ctx.filter_subset().expect("wrapper reads the filter subset");
                let (subset, trace) = wrapper_select(ctx.view, start, &ctx.config.selection)?;
                Ok(Payload::WrapperSubset(Arc::new(subset), Arc::new(trace)))
            }),
        },
        AgentSpec {
            id: AgentId::new("dependency_checker"),
            reads: vec![ArtifactKind::Dataset, ArtifactKind::FilterSubset],
            writes: ArtifactKind::Ranking,
            run: Box::new(|ctx| {
                let subset = ctx.filter_subset().expect("checker reads the filter subset");
                let ranking = Ranking::compute(ctx.view, subset, ctx.config.collapse)?;
                Ok(Payload::Ranking(Arc::new(ranking)))
            }),
        },
        AgentSpec {
            id: AgentId::new("classifier"),
            reads: vec![ArtifactKind::Dataset, ArtifactKind::WrapperSubset, ArtifactKind::Ranking],
            writes: ArtifactKind::Model,
            run: Box::new(|ctx| {
                let (subset, _) = ctx.wrapper_subset().expect("classifier reads the wrapper subset");
                let model = nbc::fit(ctx.view, subset, ctx.config.alpha)?;
                Ok(Payload::Model(Arc::new(model)))
            }),
        },
    ]
}

/// Execute every registered agent in topological order over a fresh board
/// seeded with the dataset, then compose and post the report.
pub fn run_pipeline(
    dataset: Dataset,
    config: &PipelineConfig,
) -> Result<PipelineOutcome, BlackboardError> {
    let mut board = Blackboard::new();
    for agent in standard_agents() {
        board.register_agent(agent)?;
    }
    execute(&mut board, dataset, config)
}

/// Run a prepared board (standard or custom agents) over a dataset.
pub fn execute(
    board: &mut Blackboard,
    dataset: Dataset,
    config: &PipelineConfig,
) -> Result<PipelineOutcome, BlackboardError> {
    let orchestrator = AgentId::new("orchestrator");
    let dataset_name = dataset.name.clone();
    let view = discretize(&dataset, config.bins).map_err(|e| BlackboardError::AgentFailure {
        agent: orchestrator.clone(),
        source: e.into(),
    })?;
    let dataset = Arc::new(dataset);

    let mut manifest = RunManifest {
        dataset: dataset_name,
        seed: config.seed(),
        config: config.snapshot(),
        entries: Vec::new(),
    };

    let ingest_id = AgentId::new("ingest");
    let posted = board.post(ingest_id.clone(), Payload::Dataset(dataset.clone()))?;
    manifest.entries.push(ManifestEntry {
        agent: ingest_id,
        inputs: Vec::new(),
        output_kind: posted.kind,
        output_version: posted.version,
        output_digest: posted.digest.clone(),
        wall: Duration::ZERO,
    });

    // topological execution: run the first registered agent whose reads are
    // all posted, until none is runnable
    let mut ran = vec![false; board.agents.len()];
    loop {
        let next = board
            .agents
            .iter()
            .enumerate()
            .position(|(i, agent)| !ran[i] && agent.reads.iter().all(|kind| board.has(*kind)));
        let Some(index) = next else { break };
        ran[index] = true;

        let inputs: Vec<(ArtifactKind, String)> = board.agents[index]
            .reads
            .iter()
            .map(|kind| (*kind, board.latest(*kind).expect("read satisfied").digest.clone()))
            .collect();
        let started = Instant::now();
        let payload = {
            let context = AgentContext { board, view: &view, config };
            let agent = &board.agents[index];
            (agent.run)(&context).map_err(|source| BlackboardError::AgentFailure {
                agent: agent.id.clone(),
                source,
            })?
        };
        let wall = started.elapsed();
        let agent_id = board.agents[index].id.clone();
        let posted = board.post(agent_id.clone(), payload)?;
        manifest.entries.push(ManifestEntry {
            agent: agent_id,
            inputs,
            output_kind: posted.kind,
            output_version: posted.version,
            output_digest: posted.digest.clone(),
            wall,
        });
    }
    let stalled: Vec<AgentId> = board
        .agents
        .iter()
        .enumerate()
        .filter(|(i, _)| !ran[*i])
        .map(|(_, a)| a.id.clone())
        .collect();
    if !stalled.is_empty() {
        return Err(BlackboardError::Stalled(stalled));
    }

    // compose the report from the posted artifacts
    let started = Instant::now();
    let (report, model) = {
        let context = AgentContext { board, view: &view, config };
        let filter_subset = context.filter_subset()?.as_ref().clone();
        let (wrapper_subset, trace) = context.wrapper_subset()?;
        let wrapper_subset = wrapper_subset.as_ref().clone();
        let trace = trace.as_ref().clone();
        let ranking = context.ranking()?.as_ref().clone();
        let model = context.model()?.clone();
        let evaluation: Evaluation = eval::evaluate(
            &view,
            &wrapper_subset,
            config.eval_folds,
            config.seed(),
            config.alpha,
        )
        .map_err(|source| BlackboardError::AgentFailure {
            agent: orchestrator.clone(),
            source: source.into(),
        })?;
        let report = Report::build(
            &dataset,
            filter_subset,
            wrapper_subset,
            trace,
            ranking,
            &model,
            evaluation,
            Vec::new(),
        );
        (report, model)
    };
    let report = Arc::new(report);
    let wall = started.elapsed();
    let inputs: Vec<(ArtifactKind, String)> = [
        ArtifactKind::WrapperSubset,
        ArtifactKind::Ranking,
        ArtifactKind::Model,
    ]
    .iter()
    .map(|kind| (*kind, board.latest(*kind).expect("posted above").digest.clone()))
    .collect();
    let posted = board.post(orchestrator.clone(), Payload::Report(report.clone()))?;
    manifest.entries.push(ManifestEntry {
        agent: orchestrator,
        inputs,
        output_kind: posted.kind,
        output_version: posted.version,
        output_digest: posted.digest.clone(),
        wall,
    });

    Ok(PipelineOutcome { report, manifest, model })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{parse_raw, AttributeSchema};

    fn stub_agent(id: &str, reads: Vec<ArtifactKind>, writes: ArtifactKind) -> AgentSpec {
        AgentSpec {
            id: AgentId::new(id),
            reads,
            writes,
            run: Box::new(|_| Ok(Payload::FilterSubset(Arc::new(FeatureSubset::default())))),
        }
    }

    #[test]
    fn filter_then_wrapper_registration_is_accepted() {
        let mut board = Blackboard::new();
        board
            .register_agent(stub_agent("filter", vec![ArtifactKind::Dataset], ArtifactKind::FilterSubset))
            .unwrap();
        board
            .register_agent(stub_agent(
                "wrapper",
                vec![ArtifactKind::Dataset, ArtifactKind::FilterSubset],
                ArtifactKind::WrapperSubset,
            ))
            .unwrap();
        assert_eq!(board.agents().len(), 2);
    }

    #[test]
    fn self_reading_agent_is_cyclic() {
        let mut board = Blackboard::new();
        let err = board
            .register_agent(stub_agent(
                "loop",
                vec![ArtifactKind::FilterSubset],
                ArtifactKind::FilterSubset,
            ))
            .unwrap_err();
        assert!(matches!(err, BlackboardError::CyclicDependency(_)), "{err:?}");
    }

    #[test]
    fn two_agent_cycle_is_rejected() {
        let mut board = Blackboard::new();
        board
            .register_agent(stub_agent("a", vec![ArtifactKind::Ranking], ArtifactKind::Model))
            .unwrap();
        let err = board
            .register_agent(stub_agent("b", vec![ArtifactKind::Model], ArtifactKind::Ranking))
            .unwrap_err();
        assert!(matches!(err, BlackboardError::CyclicDependency(_)), "{err:?}");
    }

    #[test]
    fn duplicate_registration_is_rejected() {
        let mut board = Blackboard::new();
        board
            .register_agent(stub_agent("filter", vec![ArtifactKind::Dataset], ArtifactKind::FilterSubset))
            .unwrap();
        let err = board
            .register_agent(stub_agent("filter", vec![ArtifactKind::Dataset], ArtifactKind::Ranking))
            .unwrap_err();
        assert!(matches!(err, BlackboardError::DuplicateAgent(_)), "{err:?}");
    }

    #[test]
    fn write_once_is_enforced() {
        let mut board = Blackboard::new();
        let subset = Arc::new(FeatureSubset::default());
        board.post(AgentId::new("x"), Payload::FilterSubset(subset.clone())).unwrap();
        // same kind gets the next version, no conflict
        let second = board.post(AgentId::new("x"), Payload::FilterSubset(subset.clone())).unwrap();
        assert_eq!(second.version, 2);
        // forcing an existing version conflicts
        let err = board
            .post_versioned(AgentId::new("x"), Payload::FilterSubset(subset), 1)
            .unwrap_err();
        assert!(matches!(err, BlackboardError::WriteConflict { version: 1, .. }), "{err:?}");
    }

    #[test]
    fn identical_payloads_have_identical_digests() {
        let mut board = Blackboard::new();
        let subset = Arc::new(FeatureSubset::default());
        let d1 = board.post(AgentId::new("x"), Payload::FilterSubset(subset.clone())).unwrap().digest.clone();
        let d2 = board.post(AgentId::new("y"), Payload::FilterSubset(subset)).unwrap().digest.clone();
        assert_eq!(d1, d2);
    }

    #[test]
    fn unlabeled_dataset_fails_at_the_classifier() {
        let schema = AttributeSchema::heart76();
        // one record, no label anywhere
        let mut tokens: Vec<String> = vec!["-9".into(); 75];
        tokens[2] = "44".into();
        tokens.push("name".into());
        let ds = parse_raw(&tokens.join(" "), &schema, "unlabeled").unwrap();
        let err = run_pipeline(ds, &PipelineConfig::default()).unwrap_err();
        match err {
            BlackboardError::AgentFailure { agent, .. } => assert_eq!(agent, AgentId::new("classifier")),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn agents_run_in_topological_order() {
        let schema = AttributeSchema::heart76();
        // a tiny labeled dataset: sex tracks the label
        let mut text = String::new();
        for (sex, label) in [(0, 0), (1, 1), (0, 0), (1, 2), (0, 1), (1, 3), (0, 0), (1, 4)] {
            let mut tokens: Vec<String> = vec!["-9".into(); 75];
            tokens[3] = sex.to_string();
            tokens[57] = label.to_string();
            tokens.push("name".into());
            text.push_str(&tokens.join(" "));
            text.push('\n');
        }
        let ds = parse_raw(&text, &schema, "tiny").unwrap();
        let (_, manifest) = run_pipeline(ds, &PipelineConfig::default())
            .map(|o| (o.report, o.manifest))
            .unwrap();
        let order: Vec<String> = manifest.entries.iter().map(|e| e.agent.to_string()).collect();
        assert_eq!(
            order,
            vec!["ingest", "filter", "wrapper", "dependency_checker", "classifier", "orchestrator"]
        );
        // every agent's inputs were posted by an earlier entry
        for (i, entry) in manifest.entries.iter().enumerate() {
            for (_, digest) in &entry.inputs {
                assert!(
                    manifest.entries[..i].iter().any(|e| e.output_digest == *digest),
                    "input digest of {} not produced earlier",
                    entry.agent
                );
            }
        }
    }

    #[test]
    fn stalled_agents_are_reported() {
        let mut board = Blackboard::new();
        // reads a kind nothing produces
        board
            .register_agent(stub_agent("lonely", vec![ArtifactKind::Model], ArtifactKind::Ranking))
            .unwrap();
        let schema = AttributeSchema::heart76();
        let mut tokens: Vec<String> = vec!["-9".into(); 75];
        tokens[57] = "0".into();
        tokens.push("name".into());
        let ds = parse_raw(&tokens.join(" "), &schema, "t").unwrap();
        let err = execute(&mut board, ds, &PipelineConfig::default()).unwrap_err();
        assert!(matches!(err, BlackboardError::Stalled(_)), "{err:?}");
    }
}
