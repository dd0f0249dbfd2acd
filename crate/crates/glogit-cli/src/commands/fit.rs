//! `glogit fit`: run the Gibbs sampler on a CSV dataset and write the
//! chain, summaries and manifest.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use glogit::diagnostics::summarize;
use glogit::{run_chain, Init, PPrior, Priors, SamplerConfig};

use crate::commands::{check_positive, resolve_out_dir, warn_if_rank_deficient};
use crate::csvio::{
    dataset_from_table, read_numeric_csv, write_chain_csv, write_summary_csv, write_summary_txt,
};
use crate::error::{CmdError, CmdResult};
use crate::manifest::{file_digest, RunManifest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Zero,
    Mle,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV file with a header row; all columns numeric
    #[arg(long)]
    pub data: PathBuf,
    /// Response column name (values must be 0/1)
    #[arg(long, default_value = "y")]
    pub response: String,
    #[arg(long)]
    pub iters: usize,
    #[arg(long)]
    pub burnin: usize,
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Prior variance v of β ~ N(0, v·I)
    #[arg(long, default_value_t = 5.0)]
    pub prior_beta_var: f64,
    /// Gamma prior shape for p (ignored under --fixed-p)
    #[arg(long, default_value_t = 1.0)]
    pub prior_p_shape: f64,
    /// Gamma prior rate for p (ignored under --fixed-p)
    #[arg(long, default_value_t = 1.0)]
    pub prior_p_rate: f64,
    /// Hold the tail parameter fixed at this value instead of sampling it
    #[arg(long)]
    pub fixed_p: Option<f64>,
    #[arg(long, value_enum, default_value_t = InitArg::Zero)]
    pub init: InitArg,
    /// Use the file's columns as-is instead of prepending a ones column
    #[arg(long)]
    pub no_intercept: bool,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

pub fn run(args: FitArgs) -> CmdResult<()> {
    check_positive(args.prior_beta_var, "--prior-beta-var")?;
    check_positive(args.prior_p_shape, "--prior-p-shape")?;
    check_positive(args.prior_p_rate, "--prior-p-rate")?;
    if let Some(p) = args.fixed_p {
        check_positive(p, "--fixed-p")?;
    }
    let table = read_numeric_csv(&args.data)?;
    let (data, covariates) = dataset_from_table(&table, &args.response, !args.no_intercept)?;
    if !data.has_both_classes() {
        return Err(CmdError::Usage(format!(
            "response '{}' is all one class; the posterior is degenerate",
            args.response
        )));
    }
    warn_if_rank_deficient(&data, &args.data);

    let p_prior = match args.fixed_p {
        Some(p) => PPrior::Fixed(p),
        None => PPrior::Gamma {
            shape: args.prior_p_shape,
            rate: args.prior_p_rate,
        },
    };
    let priors = Priors::vague(data.k(), args.prior_beta_var, p_prior)?;
    let mut config = SamplerConfig::new(args.iters, args.burnin, args.seed);
    config.thin = args.thin;
    config.init = match args.init {
        InitArg::Zero => Init::Zero,
        InitArg::Mle => Init::Mle,
    };
    config.validate().map_err(CmdError::from)?;

    let out_dir = resolve_out_dir(args.out_dir.clone())?;
    let mut manifest = RunManifest::new("fit");
    manifest.seed = Some(args.seed);
    manifest.input_digest = Some(file_digest(&args.data)?);
    manifest.flag("data", args.data.display().to_string());
    manifest.flag("response", &args.response);
    manifest.flag("iters", args.iters);
    manifest.flag("burnin", args.burnin);
    manifest.flag("thin", args.thin);
    manifest.flag("prior_beta_var", args.prior_beta_var);
    manifest.flag("prior_p_shape", args.prior_p_shape);
    manifest.flag("prior_p_rate", args.prior_p_rate);
    manifest.flag("fixed_p", args.fixed_p);
    manifest.flag("init", format!("{:?}", args.init).to_lowercase());
    manifest.flag("no_intercept", args.no_intercept);
    manifest.flag("out_dir", out_dir.display().to_string());

    let chain = run_chain(&data, &priors, &config)?;
    let summary = summarize(&chain)?;

    let chain_path = out_dir.join("chain.csv");
    write_chain_csv(&chain_path, &chain)?;
    manifest.record_output(&chain_path);
    let summary_csv = out_dir.join("summary.csv");
    write_summary_csv(&summary_csv, &summary)?;
    manifest.record_output(&summary_csv);
    let summary_txt = out_dir.join("summary.txt");
    let mut labels = covariates;
    labels.push(String::new()); // p has no covariate
    write_summary_txt(&summary_txt, &summary, &labels)?;
    manifest.record_output(&summary_txt);
    manifest.write(&out_dir)?;

    println!(
        "fit: {} draws kept ({} sweeps, {} burn-in, thin {}) in {:.1}s; outputs in {}",
        chain.len(),
        args.iters,
        args.burnin,
        args.thin,
        chain.meta().elapsed_secs,
        out_dir.display()
    );
    Ok(())
}
