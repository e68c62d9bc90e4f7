//! Graph neural network summary network feeding a mixture density head.

mod batch;
pub mod density;

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::checkpoint::{load_tensors, save_tensors};
use crate::autodiff::{Tape, Tensor, Var};
use crate::error::{Error, Result};
use crate::generator::Theta;
use crate::graph::Graph;
use crate::rng::{stream, Domain};

pub use batch::{batch_graphs, node_features, GraphBatch, LayerVariant};
pub use density::{MixtureComponent, MixtureDensityParams};

/// Floor added to every softplus-transformed concentration, shape and rate.
pub const POSITIVE_FLOOR: f64 = 1e-4;

/// Raw head outputs per mixture component: 3 + 3 Dirichlet concentrations,
/// 2 + 2 Gamma shape/rate, plus one mixture logit.
const PER_COMPONENT: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Architecture {
    pub variant: LayerVariant,
    pub gnn_layers: usize,
    pub gnn_width: usize,
    pub mlp_hidden_layers: usize,
    pub mlp_width: usize,
    pub components: usize,
    pub gin_eps: f64,
    /// Apply `sign(x) ln(1 + |x|)` to the pooled embedding before the MLP.
    pub log_pool: bool,
}

impl Default for Architecture {
    fn default() -> Self {
        Architecture {
            variant: LayerVariant::HigherOrder,
            gnn_layers: 5,
            gnn_width: 20,
            mlp_hidden_layers: 3,
            mlp_width: 64,
            components: 5,
            gin_eps: 0.0,
            log_pool: true,
        }
    }
}

impl Architecture {
    pub fn with_variant(self, variant: LayerVariant) -> Self {
        Architecture { variant, ..self }
    }

    /// Width of the raw head output: `components * 11` (55 for five components).
    pub fn head_outputs(&self) -> usize {
        self.components * PER_COMPONENT
    }

    pub fn validate(&self) -> Result<()> {
        if self.gnn_layers == 0
            || self.gnn_width == 0
            || self.mlp_width == 0
            || self.components == 0
        {
            return Err(Error::Config(format!("degenerate architecture {self:?}")));
        }
        Ok(())
    }
}

/// Column ranges of the raw head output.
struct HeadLayout {
    k: usize,
}

impl HeadLayout {
    fn logits(&self) -> (usize, usize) {
        (0, self.k)
    }
    fn alpha(&self) -> (usize, usize) {
        (self.k, 3 * self.k)
    }
    fn beta(&self) -> (usize, usize) {
        (4 * self.k, 3 * self.k)
    }
    fn g_shape(&self) -> (usize, usize) {
        (7 * self.k, self.k)
    }
    fn g_rate(&self) -> (usize, usize) {
        (8 * self.k, self.k)
    }
    fn e_shape(&self) -> (usize, usize) {
        (9 * self.k, self.k)
    }
    fn e_rate(&self) -> (usize, usize) {
        (10 * self.k, self.k)
    }
}

/// All trainable tensors plus the architecture they belong to.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelWeights {
    pub arch: Architecture,
    pub names: Vec<String>,
    pub params: Vec<Tensor>,
}

/// Parameters bound onto a tape, in `ModelWeights::params` order.
struct Bound(Vec<Var>);

/// The head outputs of one forward pass, still on the tape.
pub struct HeadVars {
    pub log_weights: Var,
    pub alpha_conc: Var,
    pub beta_conc: Var,
    pub g_shape: Var,
    pub g_rate: Var,
    pub e_shape: Var,
    pub e_rate: Var,
}

fn check_finite(tape: &Tape, v: Var, what: impl FnOnce() -> String) -> Result<()> {
    if tape.value(v).iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what()))
    }
}

impl ModelWeights {
    /// Fan-in uniform initialization, zero biases, from `seed`.
    pub fn init(arch: Architecture, seed: u64) -> Result<Self> {
        arch.validate()?;
        let mut rng = stream(seed, Domain::Init, 0);
        let mut names = Vec::new();
        let mut params = Vec::new();
        let mut push =
            |name: String, rows: usize, cols: usize, bias: bool, rng: &mut dyn rand::RngCore| {
                let bound = 1.0 / (rows as f64).sqrt();
                let values = if bias {
                    vec![0.0; rows * cols]
                } else {
                    (0..rows * cols)
                        .map(|_| rng.random_range(-bound..bound))
                        .collect()
                };
                names.push(name);
                params.push(Tensor::new(rows, cols, values).expect("shape").trainable());
            };
        let w = arch.gnn_width;
        for l in 0..arch.gnn_layers {
            let d_in = if l == 0 { 1 } else { w };
            match arch.variant {
                LayerVariant::HigherOrder => {
                    push(format!("gnn{l}.w_self"), d_in, w, false, &mut rng);
                    push(format!("gnn{l}.w_neighbor"), d_in, w, false, &mut rng);
                    push(format!("gnn{l}.bias"), 1, w, true, &mut rng);
                }
                LayerVariant::Gcn => {
                    push(format!("gnn{l}.weight"), d_in, w, false, &mut rng);
                    push(format!("gnn{l}.bias"), 1, w, true, &mut rng);
                }
                LayerVariant::Gin => {
                    push(format!("gnn{l}.mlp0.weight"), d_in, w, false, &mut rng);
                    push(format!("gnn{l}.mlp0.bias"), 1, w, true, &mut rng);
                    push(format!("gnn{l}.mlp1.weight"), w, w, false, &mut rng);
                    push(format!("gnn{l}.mlp1.bias"), 1, w, true, &mut rng);
                }
            }
        }
        let mut d_in = w;
        for l in 0..arch.mlp_hidden_layers {
            push(
                format!("mlp{l}.weight"),
                d_in,
                arch.mlp_width,
                false,
                &mut rng,
            );
            push(format!("mlp{l}.bias"), 1, arch.mlp_width, true, &mut rng);
            d_in = arch.mlp_width;
        }
        push(
            "head.weight".into(),
            d_in,
            arch.head_outputs(),
            false,
            &mut rng,
        );
        push("head.bias".into(), 1, arch.head_outputs(), true, &mut rng);
        Ok(ModelWeights {
            arch,
            names,
            params,
        })
    }

    pub fn parameter_count(&self) -> usize {
        self.params.iter().map(Tensor::len).sum()
    }

    fn bind(&self, tape: &mut Tape) -> Bound {
        Bound(
            self.params
                .iter()
                .enumerate()
                .map(|(i, t)| tape.param(i, t))
                .collect(),
        )
    }

    /// Node embeddings after all message-passing layers, mean-pooled per graph.
    fn gnn_on_tape(&self, tape: &mut Tape, p: &Bound, batch: &GraphBatch) -> Result<Var> {
        let arch = &self.arch;
        let prop = batch.propagation(arch.variant, arch.gin_eps);
        let mut h = tape.input(&batch.features);
        let mut k = 0;
        for l in 0..arch.gnn_layers {
            let out = match arch.variant {
                LayerVariant::HigherOrder => {
                    let agg = tape.spmm(&prop, h)?;
                    let s = tape.matmul(h, p.0[k])?;
                    let n = tape.matmul(agg, p.0[k + 1])?;
                    let sum = tape.add(s, n)?;
                    k += 3;
                    tape.row_broadcast_add(sum, p.0[k - 1])?
                }
                LayerVariant::Gcn => {
                    let hw = tape.matmul(h, p.0[k])?;
                    let agg = tape.spmm(&prop, hw)?;
                    k += 2;
                    tape.row_broadcast_add(agg, p.0[k - 1])?
                }
                LayerVariant::Gin => {
                    let z = tape.spmm(&prop, h)?;
                    let a = tape.matmul(z, p.0[k])?;
                    let a = tape.row_broadcast_add(a, p.0[k + 1])?;
                    let a = tape.relu(a);
                    let b = tape.matmul(a, p.0[k + 2])?;
                    k += 4;
                    tape.row_broadcast_add(b, p.0[k - 1])?
                }
            };
            check_finite(tape, out, || format!("gnn layer {l}"))?;
            h = if l + 1 < arch.gnn_layers {
                tape.relu(out)
            } else {
                out
            };
        }
        let pooled = tape.segment_mean(&batch.segments, h)?;
        Ok(if arch.log_pool {
            tape.signed_log1p(pooled)
        } else {
            pooled
        })
    }

    fn gnn_param_count(&self) -> usize {
        self.arch.gnn_layers
            * match self.arch.variant {
                LayerVariant::HigherOrder => 3,
                LayerVariant::Gcn => 2,
                LayerVariant::Gin => 4,
            }
    }

    fn head_on_tape(&self, tape: &mut Tape, p: &Bound, pooled: Var) -> Result<HeadVars> {
        let mut k = self.gnn_param_count();
        let mut h = pooled;
        for l in 0..self.arch.mlp_hidden_layers {
            let z = tape.matmul(h, p.0[k])?;
            let z = tape.row_broadcast_add(z, p.0[k + 1])?;
            check_finite(tape, z, || format!("mlp layer {l}"))?;
            h = tape.relu(z);
            k += 2;
        }
        let raw = tape.matmul(h, p.0[k])?;
        let raw = tape.row_broadcast_add(raw, p.0[k + 1])?;
        check_finite(tape, raw, || "head output layer".into())?;
        let layout = HeadLayout {
            k: self.arch.components,
        };
        let positive = |tape: &mut Tape, (start, len): (usize, usize)| -> Result<Var> {
            let s = tape.slice_cols(raw, start, len)?;
            let sp = tape.softplus(s);
            Ok(tape.add_scalar(sp, POSITIVE_FLOOR))
        };
        let (ls, ll) = layout.logits();
        let logits = tape.slice_cols(raw, ls, ll)?;
        Ok(HeadVars {
            log_weights: tape.log_softmax_rows(logits),
            alpha_conc: positive(tape, layout.alpha())?,
            beta_conc: positive(tape, layout.beta())?,
            g_shape: positive(tape, layout.g_shape())?,
            g_rate: positive(tape, layout.g_rate())?,
            e_shape: positive(tape, layout.e_shape())?,
            e_rate: positive(tape, layout.e_rate())?,
        })
    }

    /// Per-graph `log q(theta | G)` as a `B x 1` tape variable.
    fn log_prob_on_tape(&self, tape: &mut Tape, head: &HeadVars, thetas: &[Theta]) -> Result<Var> {
        let k = self.arch.components;
        let bsz = thetas.len();
        let mut log_a = Vec::with_capacity(bsz * 3 * k);
        let mut log_b = Vec::with_capacity(bsz * 3 * k);
        let mut xg = Vec::with_capacity(bsz * k);
        let mut xe = Vec::with_capacity(bsz * k);
        for t in thetas {
            let (lg, le, a, b) = density::density_point(t)?;
            for _ in 0..k {
                log_a.extend(a.iter().map(|v| v.ln()));
                log_b.extend(b.iter().map(|v| v.ln()));
            }
            xg.extend(std::iter::repeat_n(lg, k));
            xe.extend(std::iter::repeat_n(le, k));
        }
        // (3k x k) matrix summing each component's three columns
        let mut group = vec![0.0; 3 * k * k];
        for c in 0..k {
            for j in 0..3 {
                group[(3 * c + j) * k + c] = 1.0;
            }
        }
        let group = tape.constant(3 * k, k, group)?;
        let log_a = tape.constant(bsz, 3 * k, log_a)?;
        let log_b = tape.constant(bsz, 3 * k, log_b)?;

        let dirichlet = |tape: &mut Tape, conc: Var, log_x: Var| -> Result<Var> {
            let total = tape.matmul(conc, group)?;
            let norm = tape.lgamma(total);
            let lg = tape.lgamma(conc);
            let lg_sum = tape.matmul(lg, group)?;
            let am1 = tape.add_scalar(conc, -1.0);
            let kern = tape.mul(am1, log_x)?;
            let kern = tape.matmul(kern, group)?;
            let d = tape.sub(norm, lg_sum)?;
            tape.add(d, kern)
        };
        let da = dirichlet(tape, head.alpha_conc, log_a)?;
        let db = dirichlet(tape, head.beta_conc, log_b)?;

        let gamma = |tape: &mut Tape, shape: Var, rate: Var, x: Vec<f64>| -> Result<Var> {
            let log_x = tape.constant(bsz, k, x.iter().map(|v| v.ln()).collect())?;
            let x = tape.constant(bsz, k, x)?;
            let log_rate = tape.log(rate);
            let t1 = tape.mul(shape, log_rate)?;
            let t2 = tape.lgamma(shape);
            let am1 = tape.add_scalar(shape, -1.0);
            let t3 = tape.mul(am1, log_x)?;
            let t4 = tape.mul(rate, x)?;
            let s = tape.sub(t1, t2)?;
            let s = tape.add(s, t3)?;
            tape.sub(s, t4)
        };
        let gg = gamma(tape, head.g_shape, head.g_rate, xg)?;
        let ge = gamma(tape, head.e_shape, head.e_rate, xe)?;

        let comp = tape.add(da, db)?;
        let comp = tape.add(comp, gg)?;
        let comp = tape.add(comp, ge)?;
        let comp = tape.add(comp, head.log_weights)?;
        Ok(tape.logsumexp_rows(comp))
    }

    /// Pooled graph embeddings (after the optional log compression), one row per graph.
    pub fn pooled_embeddings(&self, graphs: &[&Graph]) -> Result<Vec<Vec<f64>>> {
        let batch = GraphBatch::new(graphs)?;
        let mut tape = Tape::new();
        let p = self.bind(&mut tape);
        let pooled = self.gnn_on_tape(&mut tape, &p, &batch)?;
        let w = self.arch.gnn_width;
        Ok(tape.value(pooled).chunks(w).map(<[f64]>::to_vec).collect())
    }

    /// Mixture parameters for each graph of a batch.
    pub fn posterior_batch(&self, batch: &GraphBatch) -> Result<Vec<MixtureDensityParams>> {
        let mut tape = Tape::new();
        let p = self.bind(&mut tape);
        let pooled = self.gnn_on_tape(&mut tape, &p, batch)?;
        let head = self.head_on_tape(&mut tape, &p, pooled)?;
        let k = self.arch.components;
        let get = |v: Var| tape.value(v);
        let out = (0..batch.graph_count)
            .map(|b| MixtureDensityParams {
                components: (0..k)
                    .map(|c| {
                        let tri = |v: Var| {
                            let row = &get(v)[b * 3 * k..(b + 1) * 3 * k];
                            [row[3 * c], row[3 * c + 1], row[3 * c + 2]]
                        };
                        let one = |v: Var| get(v)[b * k + c];
                        MixtureComponent {
                            weight: one(head.log_weights).exp(),
                            alpha_conc: tri(head.alpha_conc),
                            beta_conc: tri(head.beta_conc),
                            g_shape: one(head.g_shape),
                            g_rate: one(head.g_rate),
                            e_shape: one(head.e_shape),
                            e_rate: one(head.e_rate),
                        }
                    })
                    .collect(),
            })
            .collect();
        Ok(out)
    }

    pub fn posterior(&self, g: &Graph) -> Result<MixtureDensityParams> {
        let batch = GraphBatch::new(&[g])?;
        Ok(self.posterior_batch(&batch)?.remove(0))
    }

    /// Mixture parameters straight from a pooled embedding, bypassing the GNN.
    pub fn head_forward(&self, pooled: &[f64]) -> Result<MixtureDensityParams> {
        let mut tape = Tape::new();
        let p = self.bind(&mut tape);
        let x = tape.constant(1, pooled.len(), pooled.to_vec())?;
        let head = self.head_on_tape(&mut tape, &p, x)?;
        let k = self.arch.components;
        let v = |var: Var| tape.value(var).to_vec();
        let (lw, a, b) = (v(head.log_weights), v(head.alpha_conc), v(head.beta_conc));
        let (gs, gr, es, er) = (
            v(head.g_shape),
            v(head.g_rate),
            v(head.e_shape),
            v(head.e_rate),
        );
        Ok(MixtureDensityParams {
            components: (0..k)
                .map(|c| MixtureComponent {
                    weight: lw[c].exp(),
                    alpha_conc: [a[3 * c], a[3 * c + 1], a[3 * c + 2]],
                    beta_conc: [b[3 * c], b[3 * c + 1], b[3 * c + 2]],
                    g_shape: gs[c],
                    g_rate: gr[c],
                    e_shape: es[c],
                    e_rate: er[c],
                })
                .collect(),
        })
    }

    fn loss_on_tape(&self, tape: &mut Tape, batch: &GraphBatch, thetas: &[Theta]) -> Result<Var> {
        if thetas.is_empty() || thetas.len() != batch.graph_count {
            return Err(Error::Contract(format!(
                "loss needs one theta per graph ({} vs {})",
                thetas.len(),
                batch.graph_count
            )));
        }
        let p = self.bind(tape);
        let pooled = self.gnn_on_tape(tape, &p, batch)?;
        let head = self.head_on_tape(tape, &p, pooled)?;
        let lp = self.log_prob_on_tape(tape, &head, thetas)?;
        let mean = tape.mean(lp);
        Ok(tape.scale(mean, -1.0))
    }

    /// `-log q(theta_i | G_i)` for each graph of the batch.
    pub fn per_graph_nll(&self, batch: &GraphBatch, thetas: &[Theta]) -> Result<Vec<f64>> {
        if thetas.len() != batch.graph_count {
            return Err(Error::Contract("one theta per graph required".into()));
        }
        let mut tape = Tape::new();
        let p = self.bind(&mut tape);
        let pooled = self.gnn_on_tape(&mut tape, &p, batch)?;
        let head = self.head_on_tape(&mut tape, &p, pooled)?;
        let lp = self.log_prob_on_tape(&mut tape, &head, thetas)?;
        Ok(tape.value(lp).iter().map(|v| -v).collect())
    }

    /// Mean negative log posterior density over a batch (the EPE estimate).
    pub fn batch_loss(&self, batch: &GraphBatch, thetas: &[Theta]) -> Result<f64> {
        let mut tape = Tape::new();
        let loss = self.loss_on_tape(&mut tape, batch, thetas)?;
        let v = tape.scalar(loss);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite("epe loss".into()))
        }
    }

    /// Loss of the batch; its gradient is added to every parameter's `grad`.
    pub fn loss_and_grad(&mut self, batch: &GraphBatch, thetas: &[Theta]) -> Result<f64> {
        let mut tape = Tape::new();
        let loss = self.loss_on_tape(&mut tape, batch, thetas)?;
        let v = tape.scalar(loss);
        if !v.is_finite() {
            return Err(Error::NonFinite("epe loss".into()));
        }
        tape.backward(loss, &mut self.params)?;
        Ok(v)
    }

    pub fn zero_grad(&mut self) {
        self.params.iter_mut().for_each(Tensor::zero_grad);
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let named: Vec<(String, &Tensor)> = self.names.iter().cloned().zip(&self.params).collect();
        save_tensors(
            dir,
            &named,
            serde_json::json!({ "architecture": self.arch }),
        )
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let (meta, tensors) = load_tensors(dir)?;
        let arch: Architecture = serde_json::from_value(meta["architecture"].clone())?;
        let reference = ModelWeights::init(arch, 0)?;
        if tensors.len() != reference.params.len() {
            return Err(Error::Contract(format!(
                "checkpoint has {} tensors, architecture needs {}",
                tensors.len(),
                reference.params.len()
            )));
        }
        for ((name, t), (rn, rt)) in tensors
            .iter()
            .zip(reference.names.iter().zip(&reference.params))
        {
            if name != rn || t.shape() != rt.shape() {
                return Err(Error::Contract(format!(
                    "checkpoint tensor {name} does not match {rn}"
                )));
            }
        }
        let (names, params) = tensors.into_iter().unzip();
        Ok(ModelWeights {
            arch,
            names,
            params,
        })
    }
}

/// Mean negative log posterior density of `pairs` under `weights`.
pub fn epe_loss(weights: &ModelWeights, pairs: &[(Theta, &Graph)]) -> Result<f64> {
    let graphs: Vec<&Graph> = pairs.iter().map(|p| p.1).collect();
    let thetas: Vec<Theta> = pairs.iter().map(|p| p.0).collect();
    weights.batch_loss(&GraphBatch::new(&graphs)?, &thetas)
}
