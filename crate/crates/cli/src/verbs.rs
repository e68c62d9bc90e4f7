use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use mechnet::generator::{
    grow_network, read_dataset, write_dataset, write_simulation, DatasetEntry, Theta, PARAM_NAMES,
};
use mechnet::graph::load_edge_list;
use mechnet::model::ModelWeights;
use mechnet::pipeline::{generate_dataset, sample_posterior, summarize_draws, train_with};
use mechnet::rng::{stream, Domain};
use mechnet::summaries::{compute_summaries, SummaryVector, SUMMARY_NAMES};
use mechnet::validation::{build_abc_pool, ppc_run, rejection_abc, sbc_coverage};
use mechnet::Graph;

use crate::{io_err, Cli, CliError, Config, Verb};

/// Runs the verb and returns the output paths it wrote, relative to `--out`.
pub(crate) fn dispatch(cli: &Cli, cfg: &Config) -> Result<Vec<String>, CliError> {
    let out = cli.out.as_path();
    match cli.verb {
        Verb::Simulate => simulate(cfg, out),
        Verb::MakeDataset => make_dataset(cfg, out),
        Verb::Train => train(cfg, out, cli.input.as_deref()),
        Verb::Infer => infer(cfg, out, input(cli)?, checkpoint(cli)?),
        Verb::Coverage => coverage(cfg, out, checkpoint(cli)?),
        Verb::Abc => abc(cfg, out, input(cli)?, cli.pool.as_deref()),
        Verb::Ppc => ppc(cfg, out, input(cli)?, checkpoint(cli)?),
        Verb::Summaries => summaries(out, input(cli)?),
    }
}

fn input(cli: &Cli) -> Result<&Path, CliError> {
    cli.input
        .as_deref()
        .ok_or_else(|| CliError::Config(format!("{:?} needs --input", cli.verb)))
}

fn checkpoint(cli: &Cli) -> Result<ModelWeights, CliError> {
    let dir = cli
        .checkpoint
        .as_deref()
        .ok_or_else(|| CliError::Config(format!("{:?} needs --checkpoint", cli.verb)))?;
    ModelWeights::load(dir).map_err(|e| match e {
        mechnet::Error::Contract(m) => io_err(dir, m),
        other => other.into(),
    })
}

fn write(out: &Path, name: &str, text: &str) -> Result<String, CliError> {
    let path = out.join(name);
    fs::write(&path, text).map_err(|e| io_err(&path, e))?;
    Ok(name.to_string())
}

fn theta_header() -> String {
    PARAM_NAMES.join(",")
}

fn theta_row(t: &Theta) -> String {
    t.to_array()
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn simulate(cfg: &Config, out: &Path) -> Result<Vec<String>, CliError> {
    let theta = cfg.simulation_theta()?;
    let sim = grow_network(
        &theta,
        &cfg.sim_config(),
        &mut stream(cfg.seed, Domain::Simulate, 0),
    );
    let entry = DatasetEntry {
        theta,
        graph: sim.graph,
        diagnostics: sim.diagnostics,
        stream: 0,
    };
    write_simulation(out, "graph", &entry, cfg.seed)?;
    Ok(vec!["graph.edges".into(), "graph.json".into()])
}

fn make_dataset(cfg: &Config, out: &Path) -> Result<Vec<String>, CliError> {
    let rc = cfg.run_config();
    for (name, n, domain) in [
        ("train", rc.n_train, Domain::Train),
        ("val", rc.n_val, Domain::Validation),
    ] {
        let data = generate_dataset(n, &rc.sim, &rc.prior, rc.master_seed, domain);
        write_dataset(&out.join(name), &data, rc.master_seed)?;
    }
    Ok(vec![
        "train/manifest.jsonl".into(),
        "val/manifest.jsonl".into(),
    ])
}

fn take(dir: &Path, n: usize) -> Result<Vec<DatasetEntry>, CliError> {
    let mut data = read_dataset(dir)?;
    if data.len() < n {
        return Err(CliError::Config(format!(
            "{} holds {} graphs, config asks for {n}",
            dir.display(),
            data.len()
        )));
    }
    data.truncate(n);
    Ok(data)
}

fn train(cfg: &Config, out: &Path, dataset: Option<&Path>) -> Result<Vec<String>, CliError> {
    let rc = cfg.run_config();
    let (tr, va) = match dataset {
        Some(dir) => (
            take(&dir.join("train"), rc.n_train)?,
            take(&dir.join("val"), rc.n_val)?,
        ),
        None => (
            generate_dataset(
                rc.n_train,
                &rc.sim,
                &rc.prior,
                rc.master_seed,
                Domain::Train,
            ),
            generate_dataset(
                rc.n_val,
                &rc.sim,
                &rc.prior,
                rc.master_seed,
                Domain::Validation,
            ),
        ),
    };
    let (weights, log) = train_with(&rc, &tr, &va, |r| {
        eprintln!(
            "epoch {:3} train {:.4} val {:.4}",
            r.epoch, r.train_epe, r.val_epe
        );
    })?;
    weights.save(&out.join("checkpoint"))?;
    // wall times would break byte-identical reruns
    let log_csv = write(out, "training_log.csv", &log.to_csv(false))?;
    Ok(vec!["checkpoint".into(), log_csv])
}

fn infer(
    cfg: &Config,
    out: &Path,
    input: &Path,
    weights: ModelWeights,
) -> Result<Vec<String>, CliError> {
    let g = load_edge_list(input)?;
    let v = &cfg.validate;
    let draws = sample_posterior(
        &weights,
        &g,
        v.n_draws,
        &mut stream(cfg.seed, Domain::Posterior, 0),
    )?;
    let mut s = String::from("parameter,median,lo,hi\n");
    for (name, m) in PARAM_NAMES.iter().zip(summarize_draws(&draws, v.interval)) {
        writeln!(s, "{name},{},{},{}", m.median, m.lo, m.hi).unwrap();
    }
    Ok(vec![write(out, "posterior.csv", &s)?])
}

fn coverage(cfg: &Config, out: &Path, weights: ModelWeights) -> Result<Vec<String>, CliError> {
    let v = &cfg.validate;
    let report = sbc_coverage(
        &weights,
        &cfg.sim.prior,
        &cfg.sim_config(),
        v.n_rep,
        &v.gammas,
        v.n_draws,
        cfg.seed,
    )?;
    Ok(vec![write(out, "coverage.csv", &report.to_csv())?])
}

type Pool = Vec<(Theta, SummaryVector)>;

fn save_pool(path: &Path, pool: &Pool) -> Result<(), CliError> {
    let file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    for row in pool {
        let line = serde_json::to_string(row).map_err(|e| io_err(path, e))?;
        writeln!(w, "{line}").map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn load_pool(path: &Path) -> Result<Pool, CliError> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    BufReader::new(file)
        .lines()
        .enumerate()
        .map(|(i, line)| {
            let line = line.map_err(|e| io_err(path, e))?;
            serde_json::from_str(&line).map_err(|e| io_err(path, format!("line {}: {e}", i + 1)))
        })
        .collect()
}

fn abc(
    cfg: &Config,
    out: &Path,
    input: &Path,
    pool_path: Option<&Path>,
) -> Result<Vec<String>, CliError> {
    let g: Graph = load_edge_list(input)?;
    let v = &cfg.validate;
    let mut written = Vec::new();
    let pool = match pool_path {
        Some(p) => load_pool(p)?,
        None => {
            let sim = cfg.sim_config().with_final_nodes(g.node_count());
            let pool = build_abc_pool(v.abc_pool, &cfg.sim.prior, &sim, cfg.seed);
            save_pool(&out.join("abc_pool.jsonl"), &pool)?;
            written.push("abc_pool.jsonl".to_string());
            pool
        }
    };
    let accepted = rejection_abc(&g, &pool, v.accept_fraction)?;
    let mut s = theta_header() + "\n";
    for t in &accepted {
        s.push_str(&theta_row(t));
        s.push('\n');
    }
    written.push(write(out, "abc_accepted.csv", &s)?);
    Ok(written)
}

fn ppc(
    cfg: &Config,
    out: &Path,
    input: &Path,
    weights: ModelWeights,
) -> Result<Vec<String>, CliError> {
    let g = load_edge_list(input)?;
    let res = ppc_run(&weights, &g, cfg.validate.n_pp, &cfg.sim_config(), cfg.seed)?;
    Ok(vec![write(out, "ppc.csv", &res.to_csv())?])
}

fn summaries(out: &Path, input: &Path) -> Result<Vec<String>, CliError> {
    let g = load_edge_list(input)?;
    let mut s = String::from("statistic,value\n");
    for (name, v) in SUMMARY_NAMES.iter().zip(compute_summaries(&g).to_array()) {
        writeln!(s, "{name},{v}").unwrap();
    }
    Ok(vec![write(out, "summaries.csv", &s)?])
}
