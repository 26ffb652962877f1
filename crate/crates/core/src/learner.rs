//! Residual feedforward regressor from fact vectors to cost-to-goal
//! estimates, trained with Adam on mean squared error.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::time::Instant;

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Error;
use crate::refinery::TrainingData;
use crate::sas::{FactVector, PartialState, Task};
use crate::seeds;

pub const HIDDEN_WIDTH: usize = 250;
pub const BORN_DEAD_RETRIES: usize = 1000;
pub const LAYER_NAMES: [&str; 5] = ["hidden1", "hidden2", "residual1", "residual2", "output"];
const MAGIC: &str = "samplan-model v1";

#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    /// `rows = outputs`, `cols = inputs`.
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    fn zeros(rows: usize, cols: usize) -> Self {
        Dense {
            weights: Array2::zeros((rows, cols)),
            bias: Array1::zeros(rows),
        }
    }

    fn he<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let normal = Normal::new(0.0, (2.0 / cols as f64).sqrt()).expect("positive std");
        Dense {
            weights: Array2::from_shape_simple_fn((rows, cols), || normal.sample(rng)),
            bias: Array1::zeros(rows),
        }
    }

    fn forward(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut z = x.dot(&self.weights.t());
        z += &self.bias;
        z
    }

    /// `relu(W x + b)` for one row. Matrix-vector products allocate no
    /// packing buffers, so search does not fragment the heap.
    fn forward_row(&self, x: ArrayView1<f64>) -> Array1<f64> {
        let mut z = self.weights.dot(&x);
        z += &self.bias;
        z.mapv_inplace(|v| v.max(0.0));
        z
    }

    fn num_params(&self) -> usize {
        self.weights.len() + self.bias.len()
    }
}

/// `x → relu(W1) → relu(W2) = a → a + relu(R2 relu(R1 a)) → relu(Wout)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    input_dim: usize,
    hidden: usize,
    layers: Vec<Dense>,
}

struct Trace {
    x: Array2<f64>,
    z: Vec<Array2<f64>>,
    a: Vec<Array2<f64>>,
    residual: Array2<f64>,
    out: Array1<f64>,
}

fn relu(z: &Array2<f64>) -> Array2<f64> {
    z.mapv(|v| v.max(0.0))
}

fn relu_grad(upstream: &Array2<f64>, z: &Array2<f64>) -> Array2<f64> {
    let mut g = upstream.clone();
    Zip::from(&mut g).and(z).for_each(|g, &z| {
        if z <= 0.0 {
            *g = 0.0
        }
    });
    g
}

/// He-initialized model with the default hidden width.
pub fn init_model(input_dim: usize, seed: u64) -> Result<Model, Error> {
    Model::new(input_dim, HIDDEN_WIDTH, seed)
}

impl Model {
    pub fn new(input_dim: usize, hidden: usize, seed: u64) -> Result<Self, Error> {
        if input_dim == 0 || hidden == 0 {
            return Err(Error::Learner("input and hidden widths must be positive".into()));
        }
        let mut rng = seeds::rng(seed);
        let shapes = Self::shapes(input_dim, hidden);
        let layers = shapes.iter().map(|&(r, c)| Dense::he(r, c, &mut rng)).collect();
        Ok(Model {
            input_dim,
            hidden,
            layers,
        })
    }

    fn shapes(input_dim: usize, hidden: usize) -> [(usize, usize); 5] {
        [
            (hidden, input_dim),
            (hidden, hidden),
            (hidden, hidden),
            (hidden, hidden),
            (1, hidden),
        ]
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(Dense::num_params).sum()
    }

    fn trace(&self, x: Array2<f64>) -> Trace {
        let l = &self.layers;
        let z0 = l[0].forward(&x);
        let a0 = relu(&z0);
        let z1 = l[1].forward(&a0);
        let a1 = relu(&z1);
        let z2 = l[2].forward(&a1);
        let a2 = relu(&z2);
        let z3 = l[3].forward(&a2);
        let a3 = relu(&z3);
        let residual = &a1 + &a3;
        let z4 = l[4].forward(&residual);
        let out = z4.column(0).mapv(|v| v.max(0.0));
        Trace {
            x,
            z: vec![z0, z1, z2, z3, z4],
            a: vec![a0, a1, a2, a3],
            residual,
            out,
        }
    }

    fn check_dim(&self, cols: usize) -> Result<(), Error> {
        if cols != self.input_dim {
            return Err(Error::Learner(format!(
                "input has {cols} features, model expects {}",
                self.input_dim
            )));
        }
        Ok(())
    }

    fn predict_row(&self, x: ArrayView1<f64>) -> f64 {
        let l = &self.layers;
        let a1 = l[1].forward_row(l[0].forward_row(x).view());
        let a3 = l[3].forward_row(l[2].forward_row(a1.view()).view());
        l[4].forward_row((a1 + a3).view())[0]
    }

    pub fn predict_batch(&self, x: ArrayView2<f64>) -> Result<Array1<f64>, Error> {
        self.check_dim(x.ncols())?;
        Ok(x.outer_iter().map(|row| self.predict_row(row)).collect())
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64, Error> {
        self.check_dim(x.len())?;
        Ok(self.predict_row(ArrayView1::from(x)))
    }

    pub fn predict_facts(&self, x: &FactVector) -> Result<f64, Error> {
        self.predict(&x.to_f64())
    }

    /// Batched estimate for complete states of `task`.
    pub fn predict_states(&self, task: &Task, states: &[PartialState]) -> Result<Array1<f64>, Error> {
        self.check_dim(task.num_facts())?;
        let mut row = vec![0.0; task.num_facts()];
        Ok(states
            .iter()
            .map(|s| {
                task.encode_into(s, &mut row);
                self.predict_row(ArrayView1::from(&row[..]))
            })
            .collect())
    }

    /// MSE and its gradient with respect to every parameter.
    pub fn loss_and_gradient(&self, x: ArrayView2<f64>, y: &Array1<f64>) -> Result<(f64, Vec<Dense>), Error> {
        self.check_dim(x.ncols())?;
        let t = self.trace(x.to_owned());
        let n = y.len() as f64;
        let diff = &t.out - y;
        let loss = diff.mapv(|d| d * d).sum() / n;

        let mut dz4 = Array2::zeros((y.len(), 1));
        Zip::from(dz4.column_mut(0))
            .and(&diff)
            .and(t.z[4].column(0))
            .for_each(|g, &d, &z| *g = if z > 0.0 { 2.0 * d / n } else { 0.0 });

        let l = &self.layers;
        let mut grads: Vec<Dense> = Vec::with_capacity(5);
        let grad = |dz: &Array2<f64>, input: &Array2<f64>| Dense {
            weights: dz.t().dot(input),
            bias: dz.sum_axis(Axis(0)),
        };
        let g4 = grad(&dz4, &t.residual);
        let d_res = dz4.dot(&l[4].weights);
        let dz3 = relu_grad(&d_res, &t.z[3]);
        let g3 = grad(&dz3, &t.a[2]);
        let dz2 = relu_grad(&dz3.dot(&l[3].weights), &t.z[2]);
        let g2 = grad(&dz2, &t.a[1]);
        let da1 = &d_res + &dz2.dot(&l[2].weights);
        let dz1 = relu_grad(&da1, &t.z[1]);
        let g1 = grad(&dz1, &t.a[0]);
        let dz0 = relu_grad(&dz1.dot(&l[1].weights), &t.z[0]);
        let g0 = grad(&dz0, &t.x);
        grads.extend([g0, g1, g2, g3, g4]);
        Ok((loss, grads))
    }

    pub fn mse(&self, x: ArrayView2<f64>, y: &Array1<f64>) -> Result<f64, Error> {
        if y.is_empty() {
            return Ok(0.0);
        }
        let mut total = 0.0;
        for start in (0..y.len()).step_by(4096) {
            let end = (start + 4096).min(y.len());
            self.check_dim(x.ncols())?;
            let pred = self.trace(x.slice(s![start..end, ..]).to_owned()).out;
            total += (&pred - &y.slice(s![start..end])).mapv(|d| d * d).sum();
        }
        Ok(total / y.len() as f64)
    }

    /// `true` when the output is zero on every row of `x`.
    pub fn is_born_dead(&self, x: ArrayView2<f64>) -> Result<bool, Error> {
        Ok(self.predict_batch(x)?.iter().all(|&v| v <= 0.0))
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<(), Error> {
        writeln!(out, "{MAGIC}")?;
        writeln!(out, "input_dim={} hidden={}", self.input_dim, self.hidden)?;
        let mut line = String::new();
        for (name, layer) in LAYER_NAMES.iter().zip(&self.layers) {
            let (rows, cols) = layer.weights.dim();
            writeln!(out, "layer {name} {rows} {cols}")?;
            for row in layer.weights.outer_iter() {
                line.clear();
                for (i, v) in row.iter().enumerate() {
                    if i > 0 {
                        line.push(' ');
                    }
                    write!(line, "{v:.16e}").expect("string write");
                }
                writeln!(out, "{line}")?;
            }
            line.clear();
            for (i, v) in layer.bias.iter().enumerate() {
                if i > 0 {
                    line.push(' ');
                }
                write!(line, "{v:.16e}").expect("string write");
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn read<R: Read>(mut input: R) -> Result<Self, Error> {
        let mut text = String::new();
        input.read_to_string(&mut text)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, Error> {
        let bad = |m: String| Error::Format(format!("model file: {m}"));
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(MAGIC) {
            return Err(bad(format!("expected `{MAGIC}` header")));
        }
        let dims = lines.next().ok_or_else(|| bad("missing dimensions line".into()))?;
        let mut input_dim = None;
        let mut hidden = None;
        for field in dims.split_whitespace() {
            match field.split_once('=') {
                Some(("input_dim", v)) => input_dim = v.parse::<usize>().ok(),
                Some(("hidden", v)) => hidden = v.parse::<usize>().ok(),
                _ => return Err(bad(format!("unexpected field `{field}`"))),
            }
        }
        let (input_dim, hidden) = match (input_dim, hidden) {
            (Some(i), Some(h)) if i > 0 && h > 0 => (i, h),
            _ => return Err(bad("bad dimensions line".into())),
        };
        let mut tokens = lines.flat_map(str::split_whitespace);
        let mut layers = Vec::new();
        for (name, (rows, cols)) in LAYER_NAMES.iter().zip(Self::shapes(input_dim, hidden)) {
            let header: Vec<&str> = tokens.by_ref().take(4).collect();
            if header != ["layer", name, &rows.to_string(), &cols.to_string()] {
                return Err(bad(format!("expected `layer {name} {rows} {cols}`, got `{}`", header.join(" "))));
            }
            let mut next = |what: &str| -> Result<f64, Error> {
                let tok = tokens
                    .next()
                    .ok_or_else(|| bad(format!("truncated {what} of layer {name}")))?;
                tok.parse().map_err(|_| bad(format!("bad number `{tok}`")))
            };
            let mut layer = Dense::zeros(rows, cols);
            for w in layer.weights.iter_mut() {
                *w = next("weights")?;
            }
            for b in layer.bias.iter_mut() {
                *b = next("biases")?;
            }
            layers.push(layer);
        }
        if let Some(extra) = tokens.next() {
            return Err(bad(format!("trailing token `{extra}`")));
        }
        Ok(Model {
            input_dim,
            hidden,
            layers,
        })
    }
}

/// Feature matrix and raw `h` targets.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub x: Array2<f64>,
    pub y: Array1<f64>,
}

impl Dataset {
    pub fn from_training(data: &TrainingData) -> Self {
        let mut x = Array2::zeros((data.rows.len(), data.num_facts));
        for (mut row, (_, bits)) in x.outer_iter_mut().zip(&data.rows) {
            for (dst, &b) in row.iter_mut().zip(&bits.bits) {
                *dst = b as u8 as f64;
            }
        }
        let y = data.rows.iter().map(|&(h, _)| h as f64).collect();
        Dataset { x, y }
    }

    pub fn from_states(task: &Task, rows: &[(PartialState, f64)]) -> Self {
        let mut x = Array2::zeros((rows.len(), task.num_facts()));
        for (mut out, (s, _)) in x.outer_iter_mut().zip(rows) {
            task.encode_into(s, out.as_slice_mut().expect("contiguous row"));
        }
        Dataset {
            x,
            y: rows.iter().map(|r| r.1).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    fn select(&self, idx: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select(Axis(0), idx),
            y: self.y.select(Axis(0), idx),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub patience: usize,
    pub train_fraction: f64,
    pub max_seconds: Option<f64>,
    pub max_epochs: Option<usize>,
    pub hidden: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 64,
            patience: 100,
            train_fraction: 0.9,
            max_seconds: None,
            max_epochs: None,
            hidden: HIDDEN_WIDTH,
            seed: 1,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<(), Error> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!("train fraction must lie in (0, 1), got {}", self.train_fraction)));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    Patience,
    MaxEpochs,
    Timeout,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    pub epochs: usize,
    pub best_epoch: usize,
    pub best_validation_loss: f64,
    pub final_training_loss: f64,
    pub validation_history: Vec<f64>,
    pub stop: StopReason,
    pub seconds: f64,
    pub born_dead_retries: usize,
}

impl TrainReport {
    /// Equality ignoring wall time.
    pub fn same_outcome(&self, other: &TrainReport) -> bool {
        TrainReport {
            seconds: 0.0,
            ..self.clone()
        } == TrainReport {
            seconds: 0.0,
            ..other.clone()
        }
    }
}

struct Adam {
    m: Vec<Dense>,
    v: Vec<Dense>,
    t: i32,
}

impl Adam {
    fn new(model: &Model) -> Self {
        let zeros = || {
            model
                .layers
                .iter()
                .map(|l| Dense::zeros(l.weights.nrows(), l.weights.ncols()))
                .collect()
        };
        Adam {
            m: zeros(),
            v: zeros(),
            t: 0,
        }
    }

    fn step(&mut self, model: &mut Model, grads: &[Dense], cfg: &TrainConfig) {
        self.t += 1;
        let (b1, b2) = (cfg.beta1, cfg.beta2);
        let c1 = 1.0 - b1.powi(self.t);
        let c2 = 1.0 - b2.powi(self.t);
        let (lr, eps) = (cfg.learning_rate, cfg.epsilon);
        let update = |p: &mut f64, m: &mut f64, v: &mut f64, &g: &f64| {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
        };
        for (((p, m), v), g) in model.layers.iter_mut().zip(&mut self.m).zip(&mut self.v).zip(grads) {
            Zip::from(&mut p.weights)
                .and(&mut m.weights)
                .and(&mut v.weights)
                .and(&g.weights)
                .for_each(update);
            Zip::from(&mut p.bias)
                .and(&mut m.bias)
                .and(&mut v.bias)
                .and(&g.bias)
                .for_each(update);
        }
    }
}

/// Seeded 90/10 split. Sets under ten samples train and validate on all rows.
pub fn split(data: &Dataset, train_fraction: f64, seed: u64) -> (Dataset, Dataset) {
    let n = data.len();
    if n < 10 {
        return (data.clone(), data.clone());
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut seeds::stream(seed, "split"));
    let n_train = ((n as f64 * train_fraction).round() as usize).clamp(1, n - 1);
    (data.select(&idx[..n_train]), data.select(&idx[n_train..]))
}

/// Mini-batch Adam on MSE with validation early stopping; returns the
/// best-validation parameters.
pub fn train(model: Model, data: &Dataset, config: &TrainConfig) -> Result<(Model, TrainReport), Error> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::Learner("empty training set".into()));
    }
    model.check_dim(data.x.ncols())?;
    let started = Instant::now();
    let (train_set, valid_set) = split(data, config.train_fraction, config.seed);
    let mut shuffle_rng = seeds::stream(config.seed, "shuffle");
    let mut model = model;
    let mut adam = Adam::new(&model);
    let mut order: Vec<usize> = (0..train_set.len()).collect();

    let mut best = (model.clone(), f64::INFINITY, 0usize);
    let mut history = Vec::new();
    let mut since_best = 0;
    let mut epoch = 0;
    let mut final_training_loss;
    let stop = loop {
        epoch += 1;
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(config.batch_size) {
            let bx = train_set.x.select(Axis(0), batch);
            let by = train_set.y.select(Axis(0), batch);
            let (loss, grads) = model.loss_and_gradient(bx.view(), &by)?;
            loss_sum += loss * batch.len() as f64;
            adam.step(&mut model, &grads, config);
        }
        final_training_loss = loss_sum / train_set.len() as f64;
        let valid = model.mse(valid_set.x.view(), &valid_set.y)?;
        history.push(valid);
        if valid < best.1 {
            best = (model.clone(), valid, epoch);
            since_best = 0;
        } else {
            since_best += 1;
        }
        log::debug!("epoch {epoch}: train {final_training_loss:.5} valid {valid:.5}");
        if since_best >= config.patience {
            break StopReason::Patience;
        }
        if config.max_epochs.is_some_and(|m| epoch >= m) {
            break StopReason::MaxEpochs;
        }
        if config
            .max_seconds
            .is_some_and(|s| started.elapsed().as_secs_f64() >= s)
        {
            break StopReason::Timeout;
        }
    };
    let (best_model, best_loss, best_epoch) = best;
    Ok((
        best_model,
        TrainReport {
            epochs: epoch,
            best_epoch,
            best_validation_loss: best_loss,
            final_training_loss,
            validation_history: history,
            stop,
            seconds: started.elapsed().as_secs_f64(),
            born_dead_retries: 0,
        },
    ))
}

/// Reinitializes from derived seeds until the model outputs a positive value
/// for some row of `x`. Returns the model and the number of retries.
pub fn ensure_not_born_dead(model: Model, x: ArrayView2<f64>, seed: u64) -> Result<(Model, usize), Error> {
    if x.nrows() == 0 {
        return Err(Error::Learner("born-dead check needs at least one input".into()));
    }
    if !model.is_born_dead(x)? {
        return Ok((model, 0));
    }
    for retry in 1..=BORN_DEAD_RETRIES {
        let candidate = Model::new(
            model.input_dim,
            model.hidden,
            seeds::derive(seed, &format!("reinit-{retry}")),
        )?;
        if !candidate.is_born_dead(x)? {
            log::info!("network born dead, reseeded after {retry} retries");
            return Ok((candidate, retry));
        }
    }
    Err(Error::Learner(format!("network still born dead after {BORN_DEAD_RETRIES} reseeds")))
}

/// Initializes from `config.seed`, reseeds born-dead networks and trains.
pub fn fit(data: &Dataset, config: &TrainConfig) -> Result<(Model, TrainReport), Error> {
    if data.is_empty() {
        return Err(Error::Learner("empty training set".into()));
    }
    let model = Model::new(data.x.ncols(), config.hidden, seeds::derive(config.seed, "init"))?;
    let (train_rows, _) = split(data, config.train_fraction, config.seed);
    let (model, retries) = ensure_not_born_dead(model, train_rows.x.view(), config.seed)?;
    let (model, mut report) = train(model, data, config)?;
    report.born_dead_retries = retries;
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::enumerate_forward;
    use crate::sas::parse_sas;
    use crate::testing::TOY3;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_data(n: usize, f: usize, seed: u64, target: impl Fn(&[f64]) -> f64) -> Dataset {
        let mut rng = seeds::rng(seed);
        let x = Array2::from_shape_simple_fn((n, f), || rng.gen_range(0..2) as f64);
        let y = x.outer_iter().map(|r| target(r.as_slice().unwrap())).collect();
        Dataset { x, y }
    }

    #[test]
    fn init_shapes_and_determinism() {
        let a = init_model(4, 1).unwrap();
        assert_eq!(a, init_model(4, 1).unwrap());
        assert_ne!(a, init_model(4, 2).unwrap());
        assert_eq!(a.layers()[0].weights.dim(), (250, 4));
        assert_eq!(a.layers()[4].weights.dim(), (1, 250));
        assert!(a.layers().iter().all(|l| l.bias.iter().all(|&b| b == 0.0)));
        assert!(init_model(0, 1).is_err());
    }

    #[test]
    fn he_variance() {
        let m = init_model(200, 5).unwrap();
        let w = &m.layers()[1].weights;
        let var = w.mapv(|v| v * v).mean().unwrap();
        assert!((var - 2.0 / 250.0).abs() < 0.0005, "{var}");
        let w0 = &m.layers()[0].weights;
        let var0 = w0.mapv(|v| v * v).mean().unwrap();
        assert!((var0 - 2.0 / 200.0).abs() < 0.0005, "{var0}");
    }

    #[test]
    fn dimension_mismatch() {
        let m = init_model(4, 1).unwrap();
        assert!(matches!(m.predict(&[0.0; 3]), Err(Error::Learner(_))));
        assert!(m.predict(&[1.0, 0.0, 0.0, 1.0]).unwrap() >= 0.0);
    }

    #[test]
    fn residual_block_identity() {
        let mut m = Model::new(5, 8, 3).unwrap();
        m.layers_mut()[4].bias[0] = 10.0;
        for l in &mut m.layers_mut()[2..4] {
            l.weights.fill(0.0);
            l.bias.fill(0.0);
        }
        let x = random_data(6, 5, 1, |_| 0.0).x;
        let a = relu(&m.layers()[1].forward(&relu(&m.layers()[0].forward(&x))));
        let expected = m.layers()[4].forward(&a).column(0).mapv(|v| v.max(0.0));
        let got = m.predict_batch(x.view()).unwrap();
        assert!(got.iter().zip(&expected).all(|(a, b)| (a - b).abs() <= 1e-9 * b.abs().max(1.0)));
    }

    fn gradient_check_error(seed: u64) -> f64 {
        let mut m = Model::new(6, 7, seed).unwrap();
        let mut rng = seeds::rng(seed + 100);
        for l in m.layers_mut() {
            l.bias.mapv_inplace(|_| rng.gen_range(-0.1..0.1));
        }
        m.layers_mut()[4].bias[0] = 2.0;
        let x = Array2::from_shape_simple_fn((5, 6), || rng.gen_range(-1.0..1.0));
        let y = Array1::from_shape_simple_fn(5, || rng.gen_range(0.0..5.0));
        let (_, grads) = m.loss_and_gradient(x.view(), &y).unwrap();
        let eps = 1e-5;
        let mut worst: f64 = 0.0;
        for li in 0..5 {
            let mut analytic = Vec::new();
            let mut numeric = Vec::new();
            let n_w = m.layers()[li].weights.len();
            for k in 0..n_w + m.layers()[li].bias.len() {
                let probe = |m: &mut Model, delta: f64| {
                    let l = &mut m.layers_mut()[li];
                    if k < n_w {
                        l.weights.as_slice_mut().unwrap()[k] += delta;
                    } else {
                        l.bias[k - n_w] += delta;
                    }
                };
                probe(&mut m, eps);
                let plus = m.mse(x.view(), &y).unwrap();
                probe(&mut m, -2.0 * eps);
                let minus = m.mse(x.view(), &y).unwrap();
                probe(&mut m, eps);
                numeric.push((plus - minus) / (2.0 * eps));
                analytic.push(if k < n_w {
                    grads[li].weights.as_slice().unwrap()[k]
                } else {
                    grads[li].bias[k - n_w]
                });
            }
            let diff: f64 = analytic.iter().zip(&numeric).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let norm = analytic.iter().map(|a| a * a).sum::<f64>().sqrt().max(numeric.iter().map(|a| a * a).sum::<f64>().sqrt());
            if norm > 0.0 {
                worst = worst.max(diff / norm);
            }
        }
        worst
    }

    #[test]
    fn gradient_check() {
        for seed in 1..4 {
            let err = gradient_check_error(seed);
            assert!(err <= 1e-4, "seed {seed}: relative error {err}");
        }
    }

    #[test]
    fn serialization_round_trip() {
        let m = Model::new(3, 4, 9).unwrap();
        let text = m.to_text();
        assert!(text.starts_with("samplan-model v1\ninput_dim=3 hidden=4\nlayer hidden1 4 3\n"));
        let back = Model::parse(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_text(), text);
        assert!(Model::parse(&text.replace("hidden2", "hiddenX")).is_err());
        assert!(Model::parse(&text[..text.len() - 30]).is_err());
    }

    #[test]
    fn forced_dead_is_reseeded() {
        let data = random_data(20, 4, 2, |_| 1.0);
        let mut dead = init_model(4, 1).unwrap();
        dead.layers_mut()[4].weights.fill(0.0);
        dead.layers_mut()[4].bias[0] = -1e3;
        assert!(dead.is_born_dead(data.x.view()).unwrap());
        let (alive, retries) = ensure_not_born_dead(dead, data.x.view(), 1).unwrap();
        assert!(retries >= 1);
        assert!(!alive.is_born_dead(data.x.view()).unwrap());
    }

    #[test]
    fn healthy_init_is_kept() {
        let task = parse_sas(TOY3).unwrap();
        let space = enumerate_forward(&task, 10).unwrap();
        let rows: Vec<_> = space.states().iter().map(|s| (s.clone(), 0.0)).collect();
        let data = Dataset::from_states(&task, &rows);
        let healthy = (1..50)
            .map(|s| init_model(4, s).unwrap())
            .find(|m| !m.is_born_dead(data.x.view()).unwrap())
            .unwrap();
        let (kept, retries) = ensure_not_born_dead(healthy.clone(), data.x.view(), 1).unwrap();
        assert_eq!(retries, 0);
        assert_eq!(kept, healthy);
    }

    #[test]
    fn fits_toy3_hstar() {
        let task = parse_sas(TOY3).unwrap();
        let space = enumerate_forward(&task, 10).unwrap();
        let rows: Vec<_> = (0..space.len())
            .map(|i| (space.state(i).clone(), space.hstar_by_id(i).unwrap() as f64))
            .collect();
        let data = Dataset::from_states(&task, &rows);
        // an output unit that is off for some input at init rarely recovers
        // on four points
        let seed = (1..)
            .find(|&s| {
                let init = Model::new(4, HIDDEN_WIDTH, seeds::derive(s, "init")).unwrap();
                init.predict_batch(data.x.view()).unwrap().iter().all(|&v| v > 0.0)
            })
            .unwrap();
        let cfg = TrainConfig {
            max_epochs: Some(3000),
            seed,
            ..TrainConfig::default()
        };
        let (model, report) = fit(&data, &cfg).unwrap();
        for (s, h) in &rows {
            let p = model.predict_facts(&task.encode_state(s)).unwrap();
            assert!((p - h).abs() <= 0.5, "{s}: {p} vs {h}");
        }
        let mut best = f64::INFINITY;
        for &v in &report.validation_history {
            best = best.min(v);
        }
        assert_eq!(best, report.best_validation_loss);
    }

    #[test]
    fn constant_target_converges() {
        let data = random_data(1000, 10, 3, |_| 3.0);
        let cfg = TrainConfig {
            max_epochs: Some(200),
            ..TrainConfig::default()
        };
        let (model, report) = fit(&data, &cfg).unwrap();
        assert!(report.epochs <= 200);
        let mse = model.mse(data.x.view(), &data.y).unwrap();
        assert!(mse <= 0.01, "mse {mse}");
    }

    #[test]
    fn training_is_deterministic_and_decreasing() {
        let data = random_data(200, 8, 4, |r| r.iter().take(4).sum::<f64>() * 2.0);
        let cfg = TrainConfig {
            hidden: 32,
            max_epochs: Some(50),
            ..TrainConfig::default()
        };
        let (m1, r1) = fit(&data, &cfg).unwrap();
        let (m2, r2) = fit(&data, &cfg).unwrap();
        assert_eq!(m1, m2);
        assert!(r1.same_outcome(&r2));
        let initial = Model::new(8, 32, seeds::derive(cfg.seed, "init")).unwrap();
        let before = initial.mse(data.x.view(), &data.y).unwrap();
        assert!(m1.mse(data.x.view(), &data.y).unwrap() < before);
    }

    #[test]
    fn empty_dataset_is_an_error() {
        let data = Dataset {
            x: Array2::zeros((0, 3)),
            y: Array1::zeros(0),
        };
        assert!(matches!(fit(&data, &TrainConfig::default()), Err(Error::Learner(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn output_is_non_negative(seed in 0u64..1000, x in proptest::collection::vec(-5.0f64..5.0, 6)) {
            let m = Model::new(6, 16, seed).unwrap();
            prop_assert!(m.predict(&x).unwrap() >= 0.0);
        }
    }
}
