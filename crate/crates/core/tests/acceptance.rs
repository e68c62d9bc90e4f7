//! One line per acceptance criterion. Criteria can be selected with
//! `ACCEPTANCE_ONLY=3,5`; the trained desk-scale model is cached under the
//! cargo target directory and reused while its configuration is unchanged.
//!
//! A failing criterion is reported but only fails the process under
//! `ACCEPTANCE_STRICT=1`, so statistical shortfalls of the desk-scale model
//! stay visible without breaking the regular test suite.

mod common;

use std::collections::hash_map::DefaultHasher;
use std::fs;
use std::hash::{Hash, Hasher};
use std::path::{Path, PathBuf};
use std::time::Instant;

use mechnet::autodiff::gradcheck::check_gradients;
use mechnet::generator::PARAM_NAMES;
use mechnet::generator::{
    grow_network_observed, select_growth_target, GrowthMechanism, Prior, SimConfig,
};
use mechnet::model::density::dirichlet_log_pdf;
use mechnet::model::{
    epe_loss, Architecture, GraphBatch, LayerVariant, MixtureComponent, MixtureDensityParams,
    ModelWeights,
};
use mechnet::pipeline::{
    generate_dataset, sample_posterior, summarize_draws, train_with, RunConfig, TrainingLog,
};
use mechnet::rng::{stream, Domain};
use mechnet::summaries::{compute_summaries, SUMMARY_NAMES};
use mechnet::validation::{
    abc_accept_indices, default_gamma_grid, ppc_run, rejection_abc, sbc_coverage,
    sbc_coverage_with, FromDraws, PriorSampler,
};
use mechnet::{Graph, Theta};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Binomial, DiscreteCDF};

const MASTER_SEED: u64 = 20_240_501;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn out_dir() -> PathBuf {
    let d = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    fs::create_dir_all(&d).unwrap();
    d
}

fn desk_sim() -> SimConfig {
    SimConfig::default().with_final_nodes(100)
}

fn c1_simulator_invariants() -> Outcome {
    let start = Instant::now();
    let prior = Prior::default();
    let (mut violations, mut events) = (0usize, 0usize);
    for i in 0..1000 {
        let mut rng = stream(MASTER_SEED, Domain::Simulate, i);
        let theta = prior.sample(&mut rng);
        let out = grow_network_observed(&theta, &desk_sim(), &mut rng, |r| {
            if r.applied {
                events += 1;
                if r.edges_before != r.edges_after {
                    violations += 1;
                }
            }
        });
        if out.graph.node_count() != 100 || out.graph.check_simple().is_err() {
            violations += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        violations == 0 && secs < 300.0,
        format!("{violations} violations over 1000 graphs and {events} applied evolution events, {secs:.1}s"),
    )
}

fn c2_mechanism_distributions() -> Outcome {
    let g = Graph::from_edges(4, [(0, 1), (1, 2)]).unwrap();
    let npa_w = [1.0 / 1.0001, 1.0 / 2.0001, 1.0 / 1.0001];
    let s: f64 = npa_w.iter().sum();
    let cases = [
        (GrowthMechanism::PreferentialAttachment, [0.25, 0.5, 0.25]),
        (
            GrowthMechanism::NegativePreferentialAttachment,
            npa_w.map(|w| w / s),
        ),
    ];
    let mut ps = Vec::new();
    for (k, (mech, probs)) in cases.into_iter().enumerate() {
        let mut rng = stream(MASTER_SEED, Domain::Simulate, 10 + k as u64);
        let mut counts = [0u64; 3];
        for _ in 0..100_000 {
            counts[select_growth_target(mech, &g, 3, &desk_sim(), &mut rng)
                .unwrap()
                .unwrap()] += 1;
        }
        ps.push((
            mech.short_name(),
            counts,
            common::chi_square_p(&counts, &probs),
        ));
    }
    let pass = ps.iter().all(|p| p.2 > 0.01);
    let detail = ps
        .iter()
        .map(|(n, c, p)| format!("{n} {c:?} p={p:.3}"))
        .collect::<Vec<_>>()
        .join("; ");
    outcome(pass, detail)
}

fn c3_density() -> Outcome {
    let flat = dirichlet_log_pdf(&[0.2, 0.3, 0.5], &[1.0; 3]);
    let flat_err = (flat - 2f64.ln()).abs();
    let mut rng = stream(MASTER_SEED, Domain::Replicate, 3);
    let mut gamma_worst: f64 = 0.0;
    for _ in 0..20 {
        let (a, b) = (rng.random_range(0.3..20.0), rng.random_range(0.2..5.0));
        gamma_worst = gamma_worst.max((common::quad::gamma_mass(a, b) - 1.0).abs());
    }
    let mut comp_worst: f64 = 0.0;
    for _ in 0..3 {
        let mut conc = || [(); 3].map(|_| rng.random_range(1.0..5.0));
        let (ac, bc) = (conc(), conc());
        let (gs, gr, es, er) = (
            rng.random_range(0.5..8.0),
            rng.random_range(0.3..3.0),
            rng.random_range(0.5..8.0),
            rng.random_range(0.3..3.0),
        );
        let total = common::quad::simplex_mass(|x| dirichlet_log_pdf(x, &ac).exp(), 600)
            * common::quad::simplex_mass(|x| dirichlet_log_pdf(x, &bc).exp(), 600)
            * common::quad::gamma_mass(gs, gr)
            * common::quad::gamma_mass(es, er);
        comp_worst = comp_worst.max((total - 1.0).abs());
    }
    // the mixture itself on a rate grid, weight vectors held fixed
    let comp = |w, ac, bc, g: (f64, f64), e: (f64, f64)| MixtureComponent {
        weight: w,
        alpha_conc: ac,
        beta_conc: bc,
        g_shape: g.0,
        g_rate: g.1,
        e_shape: e.0,
        e_rate: e.1,
    };
    let q = MixtureDensityParams {
        components: vec![
            comp(
                0.4,
                [1.5, 2.0, 3.0],
                [4.0, 1.2, 2.5],
                (2.0, 0.5),
                (3.5, 1.5),
            ),
            comp(
                0.6,
                [0.8, 5.0, 1.1],
                [2.0, 2.0, 2.0],
                (6.0, 2.0),
                (1.5, 0.4),
            ),
        ],
    };
    let (alpha, beta) = ([0.2, 0.5, 0.3], [0.6, 0.1, 0.3]);
    let (n, hg, he) = (600, 25.0 / 600.0, 40.0 / 600.0);
    let mut grid = 0.0;
    for i in 0..n {
        for j in 0..n {
            let t = Theta::new((i as f64 + 0.5) * hg, (j as f64 + 0.5) * he, alpha, beta).unwrap();
            grid += q.log_prob(&t).unwrap().exp() * hg * he;
        }
    }
    let want: f64 = q
        .components
        .iter()
        .map(|c| {
            c.weight
                * (dirichlet_log_pdf(&alpha, &c.alpha_conc)
                    + dirichlet_log_pdf(&beta, &c.beta_conc))
                .exp()
        })
        .sum();
    let mix_err = (grid / want - 1.0).abs();
    outcome(
        flat_err < 1e-10 && gamma_worst < 1e-6 && comp_worst < 1e-3 && mix_err < 1e-3,
        format!("|Dir(1,1,1) - ln2| = {flat_err:.1e}, Gamma mass error {gamma_worst:.1e}, component product {comp_worst:.1e}, mixture grid {mix_err:.1e}"),
    )
}

fn small_batch() -> (Vec<Graph>, Vec<Theta>) {
    let prior = Prior::default();
    (0..4)
        .map(|i| {
            let mut rng = stream(MASTER_SEED, Domain::Replicate, 40 + i);
            let t = prior.sample(&mut rng);
            let g = mechnet::grow_network(
                &t,
                &SimConfig::default().with_final_nodes(8 + i as usize),
                &mut rng,
            )
            .graph;
            (g, t)
        })
        .unzip()
}

fn c4_gradients() -> Outcome {
    let start = Instant::now();
    let (graphs, thetas) = small_batch();
    let refs: Vec<&Graph> = graphs.iter().collect();
    let batch = GraphBatch::new(&refs).unwrap();
    let mut details = Vec::new();
    let mut pass = true;
    for variant in LayerVariant::ALL {
        let mut w =
            ModelWeights::init(Architecture::default().with_variant(variant), MASTER_SEED).unwrap();
        w.zero_grad();
        w.loss_and_grad(&batch, &thetas).unwrap();
        let analytic: Vec<Vec<f64>> = w.params.iter().map(|t| t.grad.clone().unwrap()).collect();
        let arch = w.arch;
        let names = w.names.clone();
        let r = check_gradients(&mut w.params, &analytic, 1e-5, 1e-5, |ps| {
            let probe = ModelWeights {
                arch,
                names: names.clone(),
                params: ps.to_vec(),
            };
            probe.batch_loss(&batch, &thetas)
        })
        .unwrap();
        // a handful of relu inputs within h of zero is expected; many would hide a real failure
        pass &= r.max_rel_error < 1e-4 && r.nonsmooth * 200 <= r.checked;
        details.push(format!(
            "{} {:.1e} over {} coords ({} at relu kinks)",
            variant.name(),
            r.max_rel_error,
            r.checked,
            r.nonsmooth
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        pass && secs < 120.0,
        format!("{}, {secs:.1}s", details.join("; ")),
    )
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1.0)
}

fn c5_invariance() -> Outcome {
    let w = ModelWeights::init(Architecture::default(), MASTER_SEED).unwrap();
    let prior = Prior::default();
    let data: Vec<(Theta, Graph)> = (0..100)
        .map(|i| {
            let mut rng = stream(MASTER_SEED, Domain::Replicate, 100 + i);
            let t = prior.sample(&mut rng);
            let n = 20 + (i as usize % 5) * 10;
            (
                t,
                mechnet::grow_network(&t, &SimConfig::default().with_final_nodes(n), &mut rng)
                    .graph,
            )
        })
        .collect();
    let mut bad = 0;
    let mut check = |x: &[f64], y: &[f64]| {
        if x.len() != y.len() || x.iter().zip(y).any(|(a, b)| !close(*a, *b)) {
            bad += 1;
        }
    };
    let draws = |g: &Graph, i: u64| -> Vec<f64> {
        let mut rng = stream(MASTER_SEED, Domain::Posterior, i);
        sample_posterior(&w, g, 20, &mut rng)
            .unwrap()
            .iter()
            .flat_map(|t| t.to_array())
            .collect()
    };
    for (i, (t, g)) in data.iter().enumerate() {
        let h = g.relabel(&common::random_permutation(g.node_count(), i as u64));
        check(
            &w.pooled_embeddings(&[g]).unwrap()[0],
            &w.pooled_embeddings(&[&h]).unwrap()[0],
        );
        check(
            &[epe_loss(&w, &[(*t, g)]).unwrap()],
            &[epe_loss(&w, &[(*t, &h)]).unwrap()],
        );
        check(&draws(g, i as u64), &draws(&h, i as u64));
    }
    let refs: Vec<&Graph> = data.iter().map(|d| &d.1).collect();
    let together = w.pooled_embeddings(&refs).unwrap();
    let batch = GraphBatch::new(&refs).unwrap();
    let thetas: Vec<Theta> = data.iter().map(|d| d.0).collect();
    let nll = w.per_graph_nll(&batch, &thetas).unwrap();
    let post = w.posterior_batch(&batch).unwrap();
    for (i, (t, g)) in data.iter().enumerate() {
        check(&together[i], &w.pooled_embeddings(&[g]).unwrap()[0]);
        check(&[nll[i]], &[epe_loss(&w, &[(*t, g)]).unwrap()]);
        let mut r1 = stream(MASTER_SEED, Domain::Posterior, 1000 + i as u64);
        let mut r2 = stream(MASTER_SEED, Domain::Posterior, 1000 + i as u64);
        let d1: Vec<f64> = (0..20)
            .flat_map(|_| post[i].sample(&mut r1).to_array())
            .collect();
        let d2: Vec<f64> = sample_posterior(&w, g, 20, &mut r2)
            .unwrap()
            .iter()
            .flat_map(|t| t.to_array())
            .collect();
        check(&d1, &d2);
    }
    let all_batch = epe_loss(&w, &data.iter().map(|(t, g)| (*t, g)).collect::<Vec<_>>()).unwrap();
    let mean_single = nll.iter().sum::<f64>() / nll.len() as f64;
    check(&[all_batch], &[mean_single]);
    outcome(
        bad == 0,
        format!("{bad} mismatches over 100 graphs (relabeling and block-diagonal batching)"),
    )
}

fn c6_null_coverage() -> Outcome {
    let prior = Prior::default();
    let sampler = PriorSampler(prior);
    let mut oracle = FromDraws {
        sampler: &sampler,
        n_draws: 1000,
    };
    let grid = default_gamma_grid();
    let r = sbc_coverage_with(&mut oracle, &prior, &desk_sim(), 1000, &grid, MASTER_SEED).unwrap();
    fs::write(out_dir().join("null_coverage.csv"), r.to_csv()).unwrap();
    // 152 cells are checked jointly, so the 1% miss rate is split across them
    // (Bonferroni); pointwise misses are reported alongside
    let cells = 8 * grid.len();
    let tail = 0.005 / cells as f64;
    let (mut outside, mut pointwise) = (Vec::new(), 0);
    for (gi, g) in grid.iter().enumerate() {
        let b = Binomial::new(g / 100.0, 1000).unwrap();
        let (lo, hi) = (b.inverse_cdf(tail), b.inverse_cdf(1.0 - tail));
        let (plo, phi) = (b.inverse_cdf(0.005), b.inverse_cdf(0.995));
        for p in 0..8 {
            let h = r.hits[gi][p] as u64;
            if h < plo || h > phi {
                pointwise += 1;
            }
            if h < lo || h > hi {
                outside.push(format!("{}@{g}: {h} not in [{lo}, {hi}]", PARAM_NAMES[p]));
            }
        }
    }
    outcome(
        outside.is_empty(),
        format!(
            "{} of {cells} cells outside the simultaneous 99% band{}; {pointwise} outside pointwise 99% bands (about {:.1} expected by chance)",
            outside.len(),
            if outside.is_empty() { String::new() } else { format!(" ({})", outside.join(", ")) },
            0.01 * cells as f64
        ),
    )
}

fn fingerprint(cfg: &RunConfig) -> String {
    let mut h = DefaultHasher::new();
    serde_json::to_string(cfg).unwrap().hash(&mut h);
    format!("{:016x}", h.finish())
}

/// The desk-scale model, trained once and cached.
fn trained_model() -> (ModelWeights, TrainingLog) {
    let cfg = RunConfig {
        master_seed: MASTER_SEED,
        ..RunConfig::default()
    };
    let dir = out_dir().join(format!("model-{}", fingerprint(&cfg)));
    let log_path = dir.join("training_log.json");
    if let (Ok(w), Ok(text)) = (ModelWeights::load(&dir), fs::read_to_string(&log_path)) {
        eprintln!("using cached model in {}", dir.display());
        return (w, serde_json::from_str(&text).unwrap());
    }
    eprintln!(
        "training desk-scale model ({} / {} graphs of {} nodes)",
        cfg.n_train, cfg.n_val, cfg.sim.final_nodes
    );
    let tr = generate_dataset(
        cfg.n_train,
        &cfg.sim,
        &cfg.prior,
        cfg.master_seed,
        Domain::Train,
    );
    let va = generate_dataset(
        cfg.n_val,
        &cfg.sim,
        &cfg.prior,
        cfg.master_seed,
        Domain::Validation,
    );
    let (w, log) = train_with(&cfg, &tr, &va, |r| {
        eprintln!(
            "  epoch {:3} train {:.4} val {:.4} [{:.3}, {:.3}] {:.0}s",
            r.epoch, r.train_epe, r.val_epe, r.val_split_min, r.val_split_max, r.wall_time
        )
    })
    .unwrap();
    w.save(&dir).unwrap();
    fs::write(dir.join("training_log.csv"), log.to_csv(true)).unwrap();
    fs::write(&log_path, serde_json::to_string(&log).unwrap()).unwrap();
    (w, log)
}

fn c7_trained_coverage(w: &ModelWeights, log: &TrainingLog) -> Outcome {
    let start = Instant::now();
    let r = sbc_coverage(
        w,
        &Prior::default(),
        &desk_sim(),
        200,
        &default_gamma_grid(),
        1000,
        MASTER_SEED + 7,
    )
    .unwrap();
    fs::write(out_dir().join("trained_coverage.csv"), r.to_csv()).unwrap();
    let mut worst = (0.0f64, String::new());
    for g in [50.0, 80.0, 95.0] {
        let gi = r.gamma_index(g).unwrap();
        for p in 0..8 {
            let dev = (r.coverage(gi, p) - g / 100.0).abs();
            if dev > worst.0 {
                worst = (
                    dev,
                    format!("{}@{g} = {:.3}", PARAM_NAMES[p], r.coverage(gi, p)),
                );
            }
        }
    }
    outcome(
        worst.0 <= 0.08,
        format!(
            "max |coverage - nominal| = {:.1} pp ({}), best val EPE {:.4} at epoch {}, coverage {:.0}s",
            100.0 * worst.0,
            worst.1,
            log.best_val_epe(),
            log.best_epoch,
            start.elapsed().as_secs_f64()
        ),
    )
}

fn c8_scenarios(w: &ModelWeights) -> Outcome {
    let mut pass = true;
    let mut details = Vec::new();
    for (scenario, growth, evolution) in [(1usize, 0usize, 1usize), (2, 1, 0)] {
        let theta = Theta::scenario(scenario).unwrap();
        let mut ok = 0;
        for rep in 0..10u64 {
            let mut rng = stream(MASTER_SEED + scenario as u64, Domain::Replicate, rep);
            let g = mechnet::grow_network(&theta, &desk_sim(), &mut rng).graph;
            let draws = sample_posterior(w, &g, 1000, &mut rng).unwrap();
            let m = summarize_draws(&draws, 95.0).map(|s| s.median);
            let argmax = |xs: &[f64]| (0..3).max_by(|&a, &b| xs[a].total_cmp(&xs[b])).unwrap();
            if argmax(&m[2..5]) == growth && argmax(&m[5..8]) == evolution {
                ok += 1;
            }
        }
        pass &= ok >= 8;
        details.push(format!("scenario {scenario}: {ok}/10"));
    }
    outcome(pass, details.join(", "))
}

fn c9_abc() -> Outcome {
    let start = Instant::now();
    let pool =
        mechnet::validation::build_abc_pool(100_000, &Prior::default(), &desk_sim(), MASTER_SEED);
    let mut rng = stream(MASTER_SEED, Domain::Simulate, 99);
    let obs_theta = Prior::default().sample(&mut rng);
    let obs = mechnet::grow_network(&obs_theta, &desk_sim(), &mut rng).graph;
    let accepted = rejection_abc(&obs, &pool, 0.002).unwrap();
    let size_ok = accepted.len() == 200;

    // self-inclusion: a member's own summaries are at distance 0
    let rows: Vec<Vec<f64>> = pool.iter().map(|(_, s)| s.to_array().to_vec()).collect();
    let member = 4321;
    let idx = abc_accept_indices(&rows[member], &rows, 0.002).unwrap();
    let self_ok = idx.contains(&member);

    let mut srng = ChaCha8Rng::seed_from_u64(MASTER_SEED);
    let affine: Vec<(f64, f64)> = (0..10)
        .map(|_| {
            (
                srng.random_range(0.1..100.0) * if srng.random::<bool>() { -1.0 } else { 1.0 },
                srng.random_range(-1e3..1e3),
            )
        })
        .collect();
    let tf = |v: &[f64]| {
        v.iter()
            .zip(&affine)
            .map(|(x, (a, b))| a * x + b)
            .collect::<Vec<f64>>()
    };
    let obs_row = compute_summaries(&obs).to_array();
    let plain = abc_accept_indices(&obs_row, &rows, 0.002).unwrap();
    let scaled = abc_accept_indices(
        &tf(&obs_row),
        &rows.iter().map(|r| tf(r)).collect::<Vec<_>>(),
        0.002,
    )
    .unwrap();
    let affine_ok = plain == scaled;
    let accepted_from_indices: Vec<Theta> = plain.iter().map(|&i| pool[i].0).collect();
    outcome(
        size_ok && self_ok && affine_ok && accepted_from_indices == accepted,
        format!(
            "{} accepted from 100000, self-inclusion {self_ok}, affine invariance {affine_ok}, {:.0}s",
            accepted.len(),
            start.elapsed().as_secs_f64()
        ),
    )
}

fn c10_ppc(w: &ModelWeights) -> Outcome {
    let mut rng = stream(MASTER_SEED, Domain::Simulate, 1010);
    let theta = Prior::default().sample(&mut rng);
    let obs = mechnet::grow_network(&theta, &desk_sim(), &mut rng).graph;
    let r = ppc_run(w, &obs, 1000, &desk_sim(), MASTER_SEED).unwrap();
    fs::write(out_dir().join("ppc.csv"), r.to_csv()).unwrap();
    let inside = r.inside(95.0);
    let hits = inside.iter().filter(|x| x.1).count();
    let misses: Vec<&str> = inside
        .iter()
        .filter(|x| !x.1)
        .map(|x| SUMMARY_NAMES[x.0])
        .collect();
    outcome(
        hits >= 7,
        format!("{hits}/9 inside the central 95% interval; misses {misses:?}"),
    )
}

fn c11_architecture_logs() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    let base = RunConfig {
        n_train: 1000,
        n_val: 1000,
        max_epochs: 3,
        patience: 3,
        master_seed: MASTER_SEED,
        ..RunConfig::default()
    };
    let tr = generate_dataset(
        base.n_train,
        &base.sim,
        &base.prior,
        base.master_seed,
        Domain::Train,
    );
    let va = generate_dataset(
        base.n_val,
        &base.sim,
        &base.prior,
        base.master_seed,
        Domain::Validation,
    );
    for variant in LayerVariant::ALL {
        let cfg = RunConfig {
            arch: base.arch.with_variant(variant),
            ..base.clone()
        };
        let (_, log) = train_with(&cfg, &tr, &va, |_| {}).unwrap();
        let csv = log.to_csv(false);
        fs::write(
            out_dir().join(format!("arch_{}.csv", variant.name())),
            log.to_csv(true),
        )
        .unwrap();
        let rows_ok = log.epochs.len() == 3
            && csv.lines().count() == 4
            && log.epochs.iter().all(|e| {
                e.val_split_min <= e.val_epe
                    && e.val_epe <= e.val_split_max
                    && e.val_epe.is_finite()
            });
        pass &= rows_ok;
        let last = log.epochs.last().unwrap();
        details.push(format!(
            "{} val {:.3} [{:.3}, {:.3}]",
            variant.name(),
            last.val_epe,
            last.val_split_min,
            last.val_split_max
        ));
    }
    outcome(
        pass,
        format!("250-split bands after 3 epochs: {}", details.join("; ")),
    )
}

fn main() {
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let wanted = |k: usize| only.as_ref().is_none_or(|o| o.contains(&k));
    let model = (wanted(7) || wanted(8) || wanted(10)).then(trained_model);
    let criteria: Vec<(usize, &str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (1, "simulator invariants", Box::new(c1_simulator_invariants)),
        (
            2,
            "mechanism distributions",
            Box::new(c2_mechanism_distributions),
        ),
        (3, "density correctness", Box::new(c3_density)),
        (4, "gradient fidelity", Box::new(c4_gradients)),
        (
            5,
            "permutation and batching invariance",
            Box::new(c5_invariance),
        ),
        (6, "harness calibration null", Box::new(c6_null_coverage)),
        (
            7,
            "desk-scale SBC of the trained model",
            Box::new(|| {
                let (w, log) = model.as_ref().unwrap();
                c7_trained_coverage(w, log)
            }),
        ),
        (
            8,
            "scenario recovery",
            Box::new(|| c8_scenarios(&model.as_ref().unwrap().0)),
        ),
        (9, "ABC baseline contract", Box::new(c9_abc)),
        (
            10,
            "PPC self-consistency",
            Box::new(|| c10_ppc(&model.as_ref().unwrap().0)),
        ),
        (
            11,
            "architecture-comparison harness",
            Box::new(c11_architecture_logs),
        ),
    ];
    let mut failed = Vec::new();
    for (k, name, run) in &criteria {
        if !wanted(*k) {
            continue;
        }
        let o = run();
        println!(
            "criterion {k:2} {}: {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.pass {
            failed.push(*k);
        }
    }
    println!("acceptance artifacts in {}", out_dir().display());
    if failed.is_empty() {
        println!("acceptance: all selected criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        if std::env::var_os("ACCEPTANCE_STRICT").is_some_and(|v| v == "1") {
            std::process::exit(1);
        }
    }
}
