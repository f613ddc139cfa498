use std::fs;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use lre_core::sem::{perturb_environment, random_sem, RandomSemConfig};
use lre_core::{Error, LinearSem, Result, VarSet};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::write_output;

#[derive(Clone, Copy, ValueEnum)]
pub enum Model {
    /// x1 -> x2, both noises change.
    Pair,
    /// x1 -> x2 -> x3, x1's noise changes.
    Chain,
    /// x1 -> x2, x1 -> x3, x2 -> x3, x2's noise changes.
    Triangle,
    /// Random DAG over a random causal order.
    Random,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "chain")]
    preset: Model,
    /// Output directory for env1.csv, env2.csv, ..., model.json and truth.dot.
    #[arg(long, short)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 2)]
    envs: usize,
    /// Samples per environment.
    #[arg(long, short = 'n', default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Variables whose noise changes in each new environment, by name.
    /// Defaults to the preset's choice.
    #[arg(long, value_delimiter = ',')]
    changed: Option<Vec<String>>,
    /// Number of changed variables for the random preset.
    #[arg(long, default_value_t = 1)]
    i_size: usize,
    #[arg(long, default_value_t = 10)]
    p: usize,
    #[arg(long, default_value_t = 0.25)]
    edge_prob: f64,
    /// Minimum change of a perturbed noise variance.
    #[arg(long, default_value_t = 0.1)]
    min_change: f64,
}

const COEFF: (f64, f64) = (0.5, 2.0);
const VARS: (f64, f64) = (0.5, 4.0);

fn fixed_model(p: usize, edges: &[(usize, usize)], rng: &mut ChaCha8Rng) -> Result<LinearSem> {
    let weighted: Vec<_> = edges
        .iter()
        .map(|&(i, j)| (i, j, rng.random_range(COEFF.0..=COEFF.1)))
        .collect();
    let vars = (0..p).map(|_| rng.random_range(VARS.0..=VARS.1)).collect();
    LinearSem::from_edges(p, &weighted, vec![vars])
}

pub fn run(a: SimulateArgs) -> Result<()> {
    if a.envs < 1 {
        return Err(Error::InvalidRequest("at least one environment is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let (sem, default_changed, var_range) = match a.preset {
        Model::Pair => (
            fixed_model(2, &[(0, 1)], &mut rng)?,
            VarSet::from(&[0usize, 1][..]),
            VARS,
        ),
        Model::Chain => (fixed_model(3, &[(0, 1), (1, 2)], &mut rng)?, VarSet::singleton(0), VARS),
        Model::Triangle => (
            fixed_model(3, &[(0, 1), (0, 2), (1, 2)], &mut rng)?,
            VarSet::singleton(1),
            VARS,
        ),
        Model::Random => {
            let cfg = RandomSemConfig {
                p: a.p,
                edge_prob: a.edge_prob,
                ..Default::default()
            };
            let sem = random_sem(&cfg, rng.random())?;
            if a.i_size > a.p {
                return Err(Error::InvalidRequest(format!(
                    "--i-size {} exceeds p = {}",
                    a.i_size, a.p
                )));
            }
            let changed = sample(&mut rng, a.p, a.i_size).into_iter().collect();
            (sem, changed, cfg.var_range)
        }
    };
    let names = sem.variable_names();
    let changed = match &a.changed {
        None => default_changed,
        Some(list) => {
            list.iter()
                .map(|n| {
                    names.iter().position(|m| m == n.trim()).ok_or_else(|| {
                        Error::InvalidRequest(format!("unknown variable '{n}', expected one of {names:?}"))
                    })
                })
                .collect::<Result<VarSet>>()?
        }
    };
    let mut sem = sem;
    for _ in 1..a.envs {
        sem = perturb_environment(&sem, changed, var_range, a.min_change, rng.random())?;
    }

    fs::create_dir_all(&a.out_dir).map_err(|e| Error::Data {
        path: a.out_dir.display().to_string(),
        message: format!("cannot create directory: {e}"),
    })?;
    for env in 0..a.envs {
        let data = sem.sample(env, a.samples, rng.random())?;
        let path = a.out_dir.join(format!("env{}.csv", env + 1));
        let mut buf = Vec::new();
        data.to_csv_writer(&mut buf)?;
        write_output(&path, &String::from_utf8_lossy(&buf))?;
    }
    write_output(&a.out_dir.join("model.json"), &(sem.to_json() + "\n"))?;
    write_output(
        &a.out_dir.join("truth.dot"),
        &sem.dag().with_names(Some(names.clone())).to_dot(),
    )?;
    let changed_names: Vec<&str> = changed.iter().map(|v| names[v].as_str()).collect();
    println!(
        "wrote {} environments of {} samples over {} variables to {}; changed: {}",
        a.envs,
        a.samples,
        sem.p(),
        a.out_dir.display(),
        if changed_names.is_empty() {
            "(none)".to_string()
        } else {
            changed_names.join(", ")
        }
    );
    Ok(())
}
