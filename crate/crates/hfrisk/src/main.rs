//! Command-line interface over the pipeline stage engine.
//!
//! Every subcommand ensures the stages it depends on, so running `ttest`
//! in a fresh directory first materializes the cohort and preprocessing
//! artifacts. Exit codes: 0 success, 2 config error, 3 data error,
//! 4 numeric/convergence error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hfrisk::error::Result;
use hfrisk::eval::EvalReport;
use hfrisk::pipeline::{table, RunConfig, Runner};

#[derive(Parser)]
#[command(
    name = "hfrisk",
    version,
    about = "ICU heart-failure mortality risk pipeline: synthetic cohorts, preprocessing, statistical gates, boosted trees with baselines, bootstrapped evaluation, and Shapley attribution."
)]
struct Cli {
    /// JSON run configuration; defaults to the bundled synthetic-cohort
    /// configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for run artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Materialize the cohort (synthesize or ingest CSV).
    Synth,
    /// Cleaning, split, imputation, outlier removal, oversampling.
    Prep,
    /// Train/test comparability t-test table.
    Ttest,
    /// Iterative VIF multicollinearity filter.
    Vif,
    /// Grid search and final fit for every model family.
    Train,
    /// Comparison reports with bootstrapped confidence intervals.
    Eval,
    /// Per-model ROC point files.
    Roc,
    /// Shapley attributions for the boosted model.
    Shap,
    /// Rebuild all figures from artifacts.
    Figures,
    /// Feature-removal study with bootstrap AUC distributions.
    Ablate,
    /// The full pipeline end to end.
    Run,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::from_json_file(path)?,
        None => RunConfig::bundled_default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let dir = cli
        .out
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("hfrisk_run"));
    let mut runner = Runner::new(config, &dir)?;

    match cli.command {
        Command::Synth => {
            let cohort = runner.ensure_cohort()?;
            let (neg, pos, missing) = cohort.outcome_counts();
            println!(
                "{}",
                table::render(
                    &["cohort", "value"],
                    &[
                        vec!["rows".into(), cohort.n_rows().to_string()],
                        vec!["features".into(), cohort.n_features().to_string()],
                        vec!["outcome = 0".into(), neg.to_string()],
                        vec!["outcome = 1".into(), pos.to_string()],
                        vec!["outcome missing".into(), missing.to_string()],
                        vec![
                            "missing feature cells".into(),
                            cohort.missing_cell_count().to_string()
                        ],
                    ],
                )
            );
        }
        Command::Prep => {
            let prep = runner.ensure_prep()?;
            let r = &prep.report;
            println!(
                "{}",
                table::render(
                    &["preprocessing step", "count"],
                    &[
                        vec!["rows in".into(), r.rows_in.to_string()],
                        vec![
                            "identifier columns removed".into(),
                            r.identifier_columns_removed.to_string()
                        ],
                        vec!["duplicate rows removed".into(), r.duplicates_removed.to_string()],
                        vec![
                            "constant columns removed".into(),
                            r.constant_columns_removed.to_string()
                        ],
                        vec![
                            "missing-outcome rows removed".into(),
                            r.missing_outcome_rows_removed.to_string()
                        ],
                        vec!["test rows split off".into(), r.test_rows_split_off.to_string()],
                        vec![
                            "outlier rows removed (train)".into(),
                            r.outlier_rows_removed.to_string()
                        ],
                        vec![
                            "rows added by oversampling".into(),
                            r.rows_added_by_oversampling.to_string()
                        ],
                        vec!["training rows out (balanced)".into(), r.rows_out.to_string()],
                        vec!["test rows".into(), prep.test.n_rows().to_string()],
                    ],
                )
            );
        }
        Command::Ttest => {
            let rows = runner.ensure_ttest()?;
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.feature.clone(),
                        format!("{:.2} ({:.2})", r.mean_a, r.std_a),
                        format!("{:.2} ({:.2})", r.mean_b, r.std_b),
                        format!("{:.4}", r.p_value),
                    ]
                })
                .collect();
            println!(
                "{}",
                table::render(
                    &["feature", "train mean (std)", "test mean (std)", "p-value"],
                    &body,
                )
            );
        }
        Command::Vif => {
            let report = runner.ensure_vif()?;
            let body: Vec<Vec<String>> = report
                .entries
                .iter()
                .map(|e| {
                    vec![
                        e.feature.clone(),
                        if e.vif.is_finite() {
                            format!("{:.3}", e.vif)
                        } else {
                            "inf".into()
                        },
                        if e.removed { "yes".into() } else { "no".into() },
                        e.removal_round.map_or(String::new(), |r| r.to_string()),
                    ]
                })
                .collect();
            println!(
                "{}",
                table::render(&["feature", "vif", "removed", "round"], &body)
            );
        }
        Command::Train => {
            let models = runner.ensure_train()?;
            let body: Vec<Vec<String>> = models
                .iter()
                .map(|(family, model)| vec![family.clone(), model.kind_name().to_string()])
                .collect();
            println!("{}", table::render(&["family", "fitted model"], &body));
            println!("models written to {}", runner.dir.display());
        }
        Command::Eval => {
            let (train_reports, test_reports) = runner.ensure_eval()?;
            print_reports("train dataset", &train_reports);
            print_reports("test dataset", &test_reports);
        }
        Command::Roc => {
            for path in runner.ensure_roc()? {
                println!("{}", path.display());
            }
        }
        Command::Shap => {
            let shap = runner.ensure_shap()?;
            let body: Vec<Vec<String>> = shap
                .summary
                .ranking
                .iter()
                .map(|(name, value)| {
                    let direction = shap
                        .directions
                        .iter()
                        .find(|(n, _)| n == name)
                        .map(|(_, s)| *s)
                        .unwrap_or(0);
                    let arrow = match direction {
                        1 => "up",
                        -1 => "down",
                        _ => "none",
                    };
                    vec![name.clone(), format!("{value:.5}"), arrow.to_string()]
                })
                .collect();
            println!(
                "{}",
                table::render(
                    &["feature", "mean |attribution|", "risk direction"],
                    &body,
                )
            );
            println!("base value (margin): {:.6}", shap.base_value);
        }
        Command::Figures => {
            for path in runner.ensure_figures()? {
                println!("{}", path.display());
            }
        }
        Command::Ablate => {
            let report = runner.ensure_ablation()?;
            let body: Vec<Vec<String>> = report
                .configurations
                .iter()
                .map(|c| {
                    vec![
                        c.label.clone(),
                        format!("{:.4}", c.point_auc),
                        format!("{:.4}", c.mean_auc),
                        format!("[{:.4} - {:.4}]", c.ci.lower, c.ci.upper),
                    ]
                })
                .collect();
            println!(
                "{}",
                table::render(
                    &["configuration", "test AUC", "mean bootstrap AUC", "95% CI"],
                    &body,
                )
            );
            println!("best configuration: {}", report.best().label);
        }
        Command::Run => {
            let summary = runner.run_all()?;
            print_reports("train dataset", &summary.train_reports);
            print_reports("test dataset", &summary.test_reports);
            println!(
                "best test model: {} (AUC {:.4})",
                summary.best_test_model, summary.best_test_auc
            );
            println!("artifacts in {}", summary.dir.display());
        }
    }
    Ok(())
}

fn print_reports(title: &str, reports: &[EvalReport]) {
    let body: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                r.model_name.clone(),
                format!("{:.4}", r.auc),
                format!("[{:.4} - {:.4}]", r.auc_ci.lower, r.auc_ci.upper),
                format!("{:.4}", r.accuracy),
            ]
        })
        .collect();
    println!("{title}");
    println!(
        "{}",
        table::render(&["model", "auroc", "auroc 95% ci", "accuracy"], &body)
    );
}
