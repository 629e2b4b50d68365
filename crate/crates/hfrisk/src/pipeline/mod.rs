//! End-to-end orchestration: JSON run configuration, the content-addressed
//! stage engine, the ablation driver, and figure emission.
//!
//! Every stage writes its artifacts plus a manifest entry holding a hash of
//! (crate version, resolved config, upstream hashes). Re-running with the
//! same config skips stages whose artifacts are intact and reproduces
//! byte-identical output for the rest; deleting a downstream artifact
//! re-executes only that stage and its dependents. All randomness derives
//! from the master seed and a per-stage label.

mod ablation;
mod artifacts;
mod figures;
mod svg;
pub mod table;

pub use ablation::{AblationConfigResult, AblationReport};
pub use figures::emit_figures;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baselines::{ForestParams, LogisticParams, Penalty};
use crate::boost::BoostParams;
use crate::cohort::{
    funnel, load_csv, synthesize, write_csv, Cohort, CorrelationSpec, FeatureSchema,
    InteractionTerm, SignalTerm, SignalTransform, SynthesisSpec,
};
use crate::error::{Error, Result};
use crate::eval::{
    comparison_report, grid_search_with_refit, EvalReport, EvalSettings, GridSearchOptions,
    GridSearchResult,
};
use crate::explain::{direction_check, shap_summary, tree_shap, ShapMatrix, ShapSummary};
use crate::model::{FittedModel, ModelSpec};
use crate::preprocess::{preprocess_chain, Imputer, PreprocessConfig, PreprocessReport};
use crate::seed;
use crate::stats::{t_test_table, vif_filter, TTestResult, VifReport};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum SchemaSource {
    /// The bundled feature catalog with its published summary statistics.
    Bundled,
    Path { path: PathBuf },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DataSource {
    Csv { path: PathBuf },
    Synthesize(SynthesisSettings),
}

/// Synthesis parameters; the schema comes from the run's schema source and
/// the seed derives from the master seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthesisSettings {
    pub n: usize,
    pub outcome_rate: f64,
    pub signal: Vec<SignalTerm>,
    pub interactions: Vec<InteractionTerm>,
    pub missing_rate: f64,
    pub correlation: Option<CorrelationSpec>,
}

impl Default for SynthesisSettings {
    fn default() -> Self {
        SynthesisSettings {
            n: funnel::FINAL_COHORT,
            outcome_rate: 0.10,
            signal: default_signal(),
            interactions: default_interactions(),
            missing_rate: 0.05,
            correlation: None,
        }
    }
}

/// The default planted outcome model. Monotone terms on Leucocyte, RDW and
/// Urine_output anchor the direction checks; the step and interaction terms
/// plant non-linear structure that linear learners cannot represent. Every
/// feature not named here is pure noise.
pub fn default_signal() -> Vec<SignalTerm> {
    vec![
        SignalTerm::linear("Leucocyte", 2.9),
        SignalTerm {
            feature: "Leucocyte".into(),
            coefficient: 4.0,
            transform: SignalTransform::Step { threshold: 0.5 },
        },
        SignalTerm::linear("RDW", 2.3),
        SignalTerm::linear("Urine_output", -2.7),
        SignalTerm {
            feature: "Lactic_acid".into(),
            coefficient: 2.9,
            transform: SignalTransform::Step { threshold: 0.8 },
        },
        SignalTerm::linear("Age", 1.4),
        SignalTerm {
            feature: "Creatinine".into(),
            coefficient: 2.2,
            transform: SignalTransform::Square,
        },
        SignalTerm {
            feature: "Anion_gap".into(),
            coefficient: 2.0,
            transform: SignalTransform::Step { threshold: 0.3 },
        },
    ]
}

pub fn default_interactions() -> Vec<InteractionTerm> {
    vec![
        InteractionTerm {
            features: ("Bicarbonate".into(), "Blood_sodium".into()),
            coefficient: 2.7,
        },
        InteractionTerm {
            features: ("RDW".into(), "Lactic_acid".into()),
            coefficient: 2.2,
        },
    ]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GbdtGrid {
    pub n_trees: Vec<usize>,
    pub max_depth: Vec<usize>,
    pub learning_rate: Vec<f64>,
    pub base: BoostParams,
}

impl Default for GbdtGrid {
    fn default() -> Self {
        GbdtGrid {
            n_trees: vec![100, 200, 400],
            max_depth: vec![2, 3, 4],
            learning_rate: vec![0.05, 0.1, 0.3],
            base: BoostParams::default(),
        }
    }
}

impl GbdtGrid {
    fn expand(&self) -> Vec<ModelSpec> {
        let mut cells = Vec::new();
        for &n_trees in &self.n_trees {
            for &max_depth in &self.max_depth {
                for &learning_rate in &self.learning_rate {
                    cells.push(ModelSpec::Gbdt(BoostParams {
                        n_trees,
                        max_depth,
                        learning_rate,
                        ..self.base.clone()
                    }));
                }
            }
        }
        cells
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestGrid {
    pub n_trees: Vec<usize>,
    /// None grows trees to purity.
    pub max_depth: Vec<Option<usize>>,
    pub base: ForestParams,
}

impl Default for ForestGrid {
    fn default() -> Self {
        ForestGrid {
            n_trees: vec![100, 300],
            max_depth: vec![None, Some(8)],
            base: ForestParams::default(),
        }
    }
}

impl ForestGrid {
    fn expand(&self) -> Vec<ModelSpec> {
        let mut cells = Vec::new();
        for &n_trees in &self.n_trees {
            for &max_depth in &self.max_depth {
                cells.push(ModelSpec::Forest(ForestParams {
                    n_trees,
                    max_depth,
                    ..self.base.clone()
                }));
            }
        }
        cells
    }
}

/// Hyperparameter lattices per model family. These are artifact defaults —
/// documented choices, not published values.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelGrids {
    pub gbdt: GbdtGrid,
    pub forest: ForestGrid,
    pub logistic_strengths: Vec<f64>,
    pub lasso_strengths: Vec<f64>,
    pub knn_k: Vec<usize>,
}

impl Default for ModelGrids {
    fn default() -> Self {
        ModelGrids {
            gbdt: GbdtGrid::default(),
            forest: ForestGrid::default(),
            logistic_strengths: vec![1e-3, 1e-2, 1e-1, 1.0, 10.0],
            lasso_strengths: vec![1e-3, 1e-2, 1e-1, 1.0, 10.0],
            knn_k: vec![5, 11, 21],
        }
    }
}

impl ModelGrids {
    /// (family name, grid cells) in comparison-table order.
    pub fn family_grids(&self) -> Vec<(&'static str, Vec<ModelSpec>)> {
        let logistic = |strengths: &[f64], penalty: Penalty| -> Vec<ModelSpec> {
            strengths
                .iter()
                .map(|&strength| {
                    ModelSpec::Logistic(LogisticParams {
                        penalty,
                        strength,
                        ..LogisticParams::default()
                    })
                })
                .collect()
        };
        vec![
            ("gbdt", self.gbdt.expand()),
            ("logistic", logistic(&self.logistic_strengths, Penalty::L2)),
            ("random_forest", self.forest.expand()),
            ("lasso", logistic(&self.lasso_strengths, Penalty::L1)),
            ("knn", self.knn_k.iter().map(|&k| ModelSpec::Knn { k }).collect()),
        ]
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub schema: SchemaSource,
    pub data: DataSource,
    pub preprocess: PreprocessConfig,
    pub test_fraction: f64,
    pub stratified_split: bool,
    pub vif_threshold: f64,
    pub exclude_features: Vec<String>,
    pub grids: ModelGrids,
    pub eval: EvalSettings,
    pub shap_top_k: usize,
    /// Feature sets the ablation driver removes; the baseline (empty set)
    /// is always evaluated first.
    pub ablation_sets: Vec<Vec<String>>,
    /// Ablate every model family instead of only the boosted learner.
    pub ablation_all_families: bool,
    /// Default output directory; CLI `--out` overrides it. Excluded from
    /// the manifest so runs into different directories stay byte-identical.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema: SchemaSource::Bundled,
            data: DataSource::Synthesize(SynthesisSettings::default()),
            preprocess: PreprocessConfig::default(),
            test_fraction: 0.2,
            stratified_split: true,
            vif_threshold: 5.0,
            exclude_features: Vec::new(),
            grids: ModelGrids::default(),
            eval: EvalSettings::default(),
            shap_top_k: 15,
            ablation_sets: vec![
                vec![],
                vec!["Heart_rate".into()],
                vec!["Heart_rate".into(), "Respiratory_rate".into()],
            ],
            ablation_all_families: false,
            output_dir: None,
            seed: 42,
        }
    }
}

impl RunConfig {
    pub fn from_json(json: &str) -> Result<RunConfig> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn from_json_file(path: &Path) -> Result<RunConfig> {
        RunConfig::from_json(&std::fs::read_to_string(path)?)
    }

    /// The bundled default configuration (synthetic cohort, default grids).
    pub fn bundled_default() -> RunConfig {
        RunConfig::from_json(include_str!("../../data/default_config.json"))
            .expect("bundled config is valid")
    }

    pub fn resolve_schema(&self) -> Result<FeatureSchema> {
        match &self.schema {
            SchemaSource::Bundled => Ok(FeatureSchema::bundled().clone()),
            SchemaSource::Path { path } => FeatureSchema::from_json_file(path),
        }
    }

    /// Canonical JSON of the config with the output directory stripped;
    /// this string feeds every stage hash and the manifest.
    pub fn canonical_json(&self) -> Result<String> {
        let mut value = serde_json::to_value(self)?;
        if let Some(map) = value.as_object_mut() {
            map.remove("output_dir");
        }
        Ok(serde_json::to_string_pretty(&value)?)
    }
}

// ---------------------------------------------------------------------------
// Manifest and stage engine
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StageRecord {
    hash: String,
    artifacts: Vec<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct Manifest {
    version: String,
    master_seed: u64,
    config: serde_json::Value,
    stages: BTreeMap<String, StageRecord>,
}

const MANIFEST_FILE: &str = "manifest.json";

/// Prepared cohorts as the modeling stages consume them.
#[derive(Debug, Clone)]
pub struct PrepData {
    pub schema: FeatureSchema,
    pub train: Cohort,
    pub test: Cohort,
    pub train_balanced: Cohort,
    pub imputer: Imputer,
    pub report: PreprocessReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShapOutputs {
    pub summary: ShapSummary,
    pub base_value: f64,
    pub directions: Vec<(String, i8)>,
}

/// Everything the `run` subcommand reports back.
#[derive(Debug)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub train_reports: Vec<EvalReport>,
    pub test_reports: Vec<EvalReport>,
    pub best_test_model: String,
    pub best_test_auc: f64,
}

pub struct Runner {
    pub config: RunConfig,
    pub dir: PathBuf,
    config_json: String,
    manifest: Manifest,
    hashes: BTreeMap<String, String>,
}

fn with_stage(stage: &str, err: Error) -> Error {
    match err {
        Error::Config(m) => Error::Config(format!("stage '{stage}': {m}")),
        Error::Parameter(m) => Error::Parameter(format!("stage '{stage}': {m}")),
        Error::Calibration(m) => Error::Calibration(format!("stage '{stage}': {m}")),
        Error::DegenerateSample(m) => Error::DegenerateSample(format!("stage '{stage}': {m}")),
        other => Error::Data(format!("stage '{stage}': {other}")),
    }
}

impl Runner {
    pub fn new(config: RunConfig, dir: &Path) -> Result<Runner> {
        let schema = config.resolve_schema()?;
        for name in &config.exclude_features {
            if schema.index_of(name).is_none() {
                return Err(Error::Config(format!(
                    "excluded feature '{name}' not in schema"
                )));
            }
        }
        let config_json = config.canonical_json()?;
        std::fs::create_dir_all(dir)?;
        let manifest_path = dir.join(MANIFEST_FILE);
        let manifest = if manifest_path.exists() {
            serde_json::from_str(&std::fs::read_to_string(&manifest_path)?).unwrap_or_default()
        } else {
            Manifest::default()
        };
        Ok(Runner {
            config,
            dir: dir.to_path_buf(),
            config_json,
            manifest,
            hashes: BTreeMap::new(),
        })
    }

    fn stage_hash(&self, stage: &str, parents: &[&str]) -> String {
        let mut hasher = Sha256::new();
        hasher.update(env!("CARGO_PKG_VERSION").as_bytes());
        hasher.update(stage.as_bytes());
        hasher.update(self.config_json.as_bytes());
        for parent in parents {
            hasher.update(self.hashes.get(*parent).map(String::as_str).unwrap_or(""));
        }
        let digest = hasher.finalize();
        let mut hex = String::with_capacity(64);
        for byte in digest {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }

    fn is_fresh(&self, stage: &str, hash: &str) -> bool {
        match self.manifest.stages.get(stage) {
            Some(record) if record.hash == hash => record
                .artifacts
                .iter()
                .all(|name| self.dir.join(name).exists()),
            _ => false,
        }
    }

    fn record(&mut self, stage: &str, hash: String, artifact_names: &[&str]) -> Result<()> {
        self.manifest.version = env!("CARGO_PKG_VERSION").to_string();
        self.manifest.master_seed = self.config.seed;
        self.manifest.config = serde_json::from_str(&self.config_json)?;
        self.manifest.stages.insert(
            stage.to_string(),
            StageRecord {
                hash: hash.clone(),
                artifacts: artifact_names.iter().map(|s| s.to_string()).collect(),
            },
        );
        self.hashes.insert(stage.to_string(), hash);
        let body = serde_json::to_string_pretty(&self.manifest)?;
        artifacts::write_text(&self.dir.join(MANIFEST_FILE), &body)?;
        Ok(())
    }

    fn mark_fresh(&mut self, stage: &str, hash: String) {
        self.hashes.insert(stage.to_string(), hash);
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        artifacts::write_text(&self.path(name), &serde_json::to_string_pretty(value)?)
    }

    fn read_json<T: for<'de> Deserialize<'de>>(&self, name: &str) -> Result<T> {
        Ok(serde_json::from_str(&std::fs::read_to_string(
            self.path(name),
        )?)?)
    }

    // -- cohort --------------------------------------------------------------

    pub fn ensure_cohort(&mut self) -> Result<Cohort> {
        let stage = "cohort";
        let hash = self.stage_hash(stage, &[]);
        let schema = self.config.resolve_schema()?;
        if self.is_fresh(stage, &hash) {
            self.mark_fresh(stage, hash);
            return load_csv(&self.path("cohort.csv"), &schema);
        }
        let cohort = match &self.config.data {
            DataSource::Csv { path } => load_csv(path, &schema),
            DataSource::Synthesize(settings) => synthesize(&SynthesisSpec {
                schema: schema.clone(),
                n: settings.n,
                outcome_rate: settings.outcome_rate,
                signal: settings.signal.clone(),
                interactions: settings.interactions.clone(),
                missing_rate: settings.missing_rate,
                seed: seed::derive(self.config.seed, "synth"),
                correlation: settings.correlation.clone(),
            }),
        }
        .map_err(|e| with_stage(stage, e))?;
        write_csv(&cohort, &self.path("cohort.csv"), true)?;
        self.record(stage, hash, &["cohort.csv"])?;
        Ok(cohort)
    }

    // -- preprocessing ---------------------------------------------------------

    pub fn ensure_prep(&mut self) -> Result<PrepData> {
        let stage = "prep";
        let cohort = self.ensure_cohort()?;
        let hash = self.stage_hash(stage, &["cohort"]);
        let names = [
            "prep_schema.json",
            "train.csv",
            "test.csv",
            "train_balanced.csv",
            "imputer.json",
            "preprocess_report.json",
        ];
        if self.is_fresh(stage, &hash) {
            self.mark_fresh(stage, hash);
            let schema: FeatureSchema = self.read_json("prep_schema.json")?;
            return Ok(PrepData {
                train: load_csv(&self.path("train.csv"), &schema)?,
                test: load_csv(&self.path("test.csv"), &schema)?,
                train_balanced: load_csv(&self.path("train_balanced.csv"), &schema)?,
                imputer: self.read_json("imputer.json")?,
                report: self.read_json("preprocess_report.json")?,
                schema,
            });
        }
        let out = preprocess_chain(
            &cohort,
            &self.config.preprocess,
            self.config.test_fraction,
            self.config.stratified_split,
            self.config.seed,
        )
        .map_err(|e| with_stage(stage, e))?;
        let schema = out.train.schema().clone();
        self.write_json("prep_schema.json", &schema)?;
        write_csv(&out.train, &self.path("train.csv"), true)?;
        write_csv(&out.test, &self.path("test.csv"), true)?;
        write_csv(&out.train_balanced, &self.path("train_balanced.csv"), true)?;
        self.write_json("imputer.json", &out.imputer)?;
        self.write_json("preprocess_report.json", &out.report)?;
        self.record(stage, hash, &names)?;
        Ok(PrepData {
            schema,
            train: out.train,
            test: out.test,
            train_balanced: out.train_balanced,
            imputer: out.imputer,
            report: out.report,
        })
    }

    /// Config-level exclusions applied to the post-clean cohorts.
    fn apply_exclusions(&self, prep: &PrepData) -> Result<PrepData> {
        let drop: Vec<String> = self
            .config
            .exclude_features
            .iter()
            .filter(|name| prep.schema.index_of(name).is_some())
            .cloned()
            .collect();
        if drop.is_empty() {
            return Ok(prep.clone());
        }
        Ok(PrepData {
            schema: prep.schema.without(&drop)?,
            train: prep.train.drop_features(&drop)?,
            test: prep.test.drop_features(&drop)?,
            train_balanced: prep.train_balanced.drop_features(&drop)?,
            imputer: prep.imputer.clone(),
            report: prep.report.clone(),
        })
    }

    // -- statistical gates -------------------------------------------------------

    pub fn ensure_ttest(&mut self) -> Result<Vec<TTestResult>> {
        let stage = "ttest";
        let prep = self.ensure_prep()?;
        let hash = self.stage_hash(stage, &["prep"]);
        if self.is_fresh(stage, &hash) {
            self.mark_fresh(stage, hash);
            return self.read_json("ttest_table.json");
        }
        let view = self.apply_exclusions(&prep)?;
        let table = t_test_table(&view.train, &view.test).map_err(|e| with_stage(stage, e))?;
        self.write_json("ttest_table.json", &table)?;
        artifacts::write_text(&self.path("ttest_table.csv"), &artifacts::ttest_csv(&table))?;
        self.record(stage, hash, &["ttest_table.json", "ttest_table.csv"])?;
        Ok(table)
    }

    pub fn ensure_vif(&mut self) -> Result<VifReport> {
        let stage = "vif";
        let prep = self.ensure_prep()?;
        let hash = self.stage_hash(stage, &["prep"]);
        if self.is_fresh(stage, &hash) {
            self.mark_fresh(stage, hash);
            return self.read_json("vif_report.json");
        }
        let view = self.apply_exclusions(&prep)?;
        let report =
            vif_filter(&view.train, self.config.vif_threshold).map_err(|e| with_stage(stage, e))?;
        self.write_json("vif_report.json", &report)?;
        artifacts::write_text(&self.path("vif_report.csv"), &artifacts::vif_csv(&report))?;
        self.record(stage, hash, &["vif_report.json", "vif_report.csv"])?;
        Ok(report)
    }

    /// Cohorts as the models see them: exclusions applied, VIF-removed
    /// features dropped.
    pub fn modeling_view(&mut self) -> Result<PrepData> {
        let prep = self.ensure_prep()?;
        let vif = self.ensure_vif()?;
        let view = self.apply_exclusions(&prep)?;
        let drop = vif.removed_features();
        if drop.is_empty() {
            return Ok(view);
        }
        Ok(PrepData {
            schema: view.schema.without(&drop)?,
            train: view.train.drop_features(&drop)?,
            test: view.test.drop_features(&drop)?,
            train_balanced: view.train_balanced.drop_features(&drop)?,
            imputer: view.imputer,
            report: view.report,
        })
    }

    // -- model training ------------------------------------------------------------

    pub fn ensure_train(&mut self) -> Result<Vec<(String, FittedModel)>> {
        let stage = "train";
        let view = self.modeling_view()?;
        let hash = self.stage_hash(stage, &["prep", "vif"]);
        let families = self.config.grids.family_grids();
        let model_files: Vec<String> = families
            .iter()
            .map(|(name, _)| format!("model_{name}.json"))
            .collect();
        let grid_files: Vec<String> = families
            .iter()
            .map(|(name, _)| format!("grid_{name}.json"))
            .collect();
        let mut all_files: Vec<&str> = model_files.iter().map(String::as_str).collect();
        all_files.extend(grid_files.iter().map(String::as_str));
        if self.is_fresh(stage, &hash) {
            self.mark_fresh(stage, hash);
            let mut models = Vec::new();
            for ((family, _), file) in families.iter().zip(&model_files) {
                models.push((family.to_string(), self.read_json::<FittedModel>(file)?));
            }
            return Ok(models);
        }
        let mut models = Vec::new();
        for (i, (family, grid)) in families.iter().enumerate() {
            let options = GridSearchOptions {
                folds: self.config.eval.folds,
                seed: seed::derive_indexed(self.config.seed, "grid", i as u64),
                oversample_training_folds: self.config.preprocess.oversample_to_balance,
            };
            let result = grid_search_with_refit(grid, &view.train, &view.train_balanced, &options)
                .map_err(|e| with_stage(stage, e))?;
            self.write_grid_summary(&grid_files[i], &result)?;
            self.write_json(&model_files[i], &result.model)?;
            models.push((family.to_string(), result.model));
        }
        self.record(stage, hash, &all_files)?;
        Ok(models)
    }

    fn write_grid_summary(&self, file: &str, result: &GridSearchResult) -> Result<()> {
        #[derive(Serialize)]
        struct GridSummary<'a> {
            best_index: usize,
            cells: &'a [crate::eval::GridCellResult],
            folds: &'a crate::eval::FoldDiagnostics,
        }
        self.write_json(
            file,
            &GridSummary {
                best_index: result.best_index,
                cells: &result.cells,
                folds: &result.folds,
            },
        )
    }

    // -- evaluation --------------------------------------------------------------

    pub fn ensure_eval(&mut self) -> Result<(Vec<EvalReport>, Vec<EvalReport>)> {
        let stage = "eval";
        let models = self.ensure_train()?;
        let view = self.modeling_view()?;
        let hash = self.stage_hash(stage, &["train"]);
        let names = [
            "report_train.json",
            "report_train.csv",
            "report_test.json",
            "report_test.csv",
        ];
        if self.is_fresh(stage, &hash) {
            self.mark_fresh(stage, hash);
            return Ok((
                self.read_json("report_train.json")?,
                self.read_json("report_test.json")?,
            ));
        }
        let fitted: Vec<FittedModel> = models.iter().map(|(_, m)| m.clone()).collect();
        let (train_reports, test_reports) = comparison_report(
            &fitted,
            &view.train,
            &view.test,
            &self.config.eval,
            seed::derive(self.config.seed, "eval"),
        )
        .map_err(|e| with_stage(stage, e))?;
        self.write_json("report_train.json", &train_reports)?;
        self.write_json("report_test.json", &test_reports)?;
        artifacts::write_text(
            &self.path("report_train.csv"),
            &artifacts::eval_reports_csv(&train_reports),
        )?;
        artifacts::write_text(
            &self.path("report_test.csv"),
            &artifacts::eval_reports_csv(&test_reports),
        )?;
        self.record(stage, hash, &names)?;
        Ok((train_reports, test_reports))
    }

    pub fn ensure_roc(&mut self) -> Result<Vec<PathBuf>> {
        let stage = "roc";
        let (_, test_reports) = self.ensure_eval()?;
        let hash = self.stage_hash(stage, &["eval"]);
        let names: Vec<String> = test_reports
            .iter()
            .map(|r| format!("roc_{}.csv", r.model_name))
            .collect();
        let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
        if self.is_fresh(stage, &hash) {
            self.mark_fresh(stage, hash);
            return Ok(names.iter().map(|n| self.path(n)).collect());
        }
        for (report, name) in test_reports.iter().zip(&names) {
            artifacts::write_text(&self.path(name), &artifacts::roc_csv(report))?;
        }
        self.record(stage, hash, &name_refs)?;
        Ok(names.iter().map(|n| self.path(n)).collect())
    }

    // -- explanation ----------------------------------------------------------------

    pub fn ensure_shap(&mut self) -> Result<ShapOutputs> {
        let stage = "shap";
        let models = self.ensure_train()?;
        let view = self.modeling_view()?;
        let hash = self.stage_hash(stage, &["train"]);
        let names = [
            "shap_summary.json",
            "shap_ranking.csv",
            "shap_beeswarm.csv",
            "shap_values.csv",
            "shap_directions.csv",
        ];
        if self.is_fresh(stage, &hash) {
            self.mark_fresh(stage, hash);
            return self.read_json("shap_summary.json");
        }
        // Attribution targets the boosted learner, the headline model.
        let gbdt = models
            .iter()
            .find_map(|(name, m)| if name == "gbdt" { m.as_gbdt() } else { None })
            .ok_or_else(|| Error::MissingArtifact("train".into()))?;
        let matrix: ShapMatrix = tree_shap(gbdt, &view.test).map_err(|e| with_stage(stage, e))?;
        let summary = shap_summary(&matrix, &view.test, self.config.shap_top_k)
            .map_err(|e| with_stage(stage, e))?;
        let mut directions = Vec::new();
        for f in view.schema.iter() {
            directions.push((f.name.clone(), direction_check(&matrix, &view.test, &f.name)?));
        }
        let outputs = ShapOutputs {
            summary: summary.clone(),
            base_value: matrix.base_value,
            directions: directions.clone(),
        };
        self.write_json("shap_summary.json", &outputs)?;
        artifacts::write_text(
            &self.path("shap_ranking.csv"),
            &artifacts::shap_ranking_csv(&summary),
        )?;
        artifacts::write_text(
            &self.path("shap_beeswarm.csv"),
            &artifacts::shap_beeswarm_csv(&summary),
        )?;
        artifacts::write_text(
            &self.path("shap_values.csv"),
            &artifacts::shap_matrix_csv(&matrix),
        )?;
        artifacts::write_text(
            &self.path("shap_directions.csv"),
            &artifacts::directions_csv(&directions),
        )?;
        self.record(stage, hash, &names)?;
        Ok(outputs)
    }

    // -- figures ------------------------------------------------------------------

    pub fn ensure_figures(&mut self) -> Result<Vec<PathBuf>> {
        let stage = "figures";
        self.ensure_eval()?;
        self.ensure_shap()?;
        let hash = self.stage_hash(stage, &["eval", "shap"]);
        if self.is_fresh(stage, &hash) {
            if let Some(record) = self.manifest.stages.get(stage) {
                let paths: Vec<PathBuf> = record.artifacts.iter().map(|n| self.path(n)).collect();
                self.mark_fresh(stage, hash);
                return Ok(paths);
            }
        }
        let paths = emit_figures(&self.dir).map_err(|e| with_stage(stage, e))?;
        let names: Vec<String> = paths
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().to_string())
            .collect();
        let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
        self.record(stage, hash, &name_refs)?;
        Ok(paths)
    }

    // -- ablation -------------------------------------------------------------------

    pub fn ensure_ablation(&mut self) -> Result<AblationReport> {
        ablation::ensure_ablation(self)
    }

    /// The full pipeline: cohort → preprocessing → statistical gates →
    /// per-family grid search → comparison reports → attribution → figures.
    pub fn run_all(&mut self) -> Result<RunSummary> {
        self.ensure_cohort()?;
        self.ensure_prep()?;
        self.ensure_ttest()?;
        self.ensure_vif()?;
        self.ensure_train()?;
        let (train_reports, test_reports) = self.ensure_eval()?;
        self.ensure_roc()?;
        self.ensure_shap()?;
        self.ensure_figures()?;
        let best = test_reports
            .iter()
            .max_by(|a, b| a.auc.total_cmp(&b.auc))
            .expect("at least one model");
        Ok(RunSummary {
            dir: self.dir.clone(),
            best_test_model: best.model_name.clone(),
            best_test_auc: best.auc,
            train_reports,
            test_reports,
        })
    }
}

/// Convenience wrapper: run the full pipeline for `config` into `dir`.
pub fn run_pipeline(config: RunConfig, dir: &Path) -> Result<RunSummary> {
    Runner::new(config, dir)?.run_all()
}
