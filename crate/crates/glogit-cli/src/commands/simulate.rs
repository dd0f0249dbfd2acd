//! `glogit simulate`: generate replicate datasets from the generalized
//! logistic latent-variable model.

use std::path::PathBuf;

use clap::Args;
use glogit::{simulate_dataset, RngStream};
use nalgebra::DVector;

use crate::commands::{check_positive, parse_f64_list, resolve_out_dir};
use crate::csvio::write_dataset_csv;
use crate::error::{CmdError, CmdResult};
use crate::manifest::RunManifest;

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Number of observations per replicate
    #[arg(long)]
    pub n: usize,
    /// Comma-separated true coefficients; the first is the intercept
    #[arg(long)]
    pub beta: String,
    /// True tail parameter (p = 1 is standard logistic)
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of replicate datasets (rep_1.csv … rep_<reps>.csv)
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

pub fn run(args: SimulateArgs) -> CmdResult<()> {
    let beta = parse_f64_list(&args.beta, "--beta")?;
    check_positive(args.p, "--p")?;
    if args.n == 0 {
        return Err(CmdError::Usage("--n must be ≥ 1".into()));
    }
    if args.reps == 0 {
        return Err(CmdError::Usage("--reps must be ≥ 1".into()));
    }
    if args.n < beta.len() {
        return Err(CmdError::Usage(format!(
            "--n ({}) must be at least the number of coefficients ({})",
            args.n,
            beta.len()
        )));
    }
    let out_dir = resolve_out_dir(args.out_dir.clone())?;
    let beta_vec = DVector::from_column_slice(&beta);

    let mut manifest = RunManifest::new("simulate");
    manifest.seed = Some(args.seed);
    manifest.flag("n", args.n);
    manifest.flag("beta", &beta);
    manifest.flag("p", args.p);
    manifest.flag("reps", args.reps);
    manifest.flag("out_dir", out_dir.display().to_string());

    for rep in 1..=args.reps {
        let mut rng = RngStream::new(args.seed, rep as u64);
        let data = simulate_dataset(&beta_vec, args.p, args.n, &mut rng)?;
        let path = out_dir.join(format!("rep_{rep}.csv"));
        write_dataset_csv(&path, &data)?;
        manifest.record_output(&path);
    }
    manifest.write(&out_dir)?;
    println!(
        "simulated {} dataset(s) of n = {} into {}",
        args.reps,
        args.n,
        out_dir.display()
    );
    Ok(())
}
