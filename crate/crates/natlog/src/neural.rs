//! Learned fact indexing: a one-hidden-layer perceptron trained to map
//! constant encodings to the sets of facts containing them, mimicking the
//! symbolic constant index it can replace.
//!
//! Training data is the index map itself — input row k is the one-hot of
//! vocabulary constant k, target row k the multi-hot of the facts that
//! constant occurs in — so the learning problem is memorization, trained by
//! seeded full-batch gradient descent on binary cross-entropy. Predictions
//! may be wrong in either direction; the engine's ground unification step
//! keeps answers sound regardless.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path as FsPath;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::db::{FactDb, FactId, Indexer};
use crate::term::{Constant, Term};

/// Hyperparameters for [`Mlp::fit`]. `hidden_size = None` picks
/// `max(16, number of facts)`.
#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub hidden_size: Option<usize>,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Prediction cutoff, strictly between 0 and 1.
    pub threshold: f64,
}

impl Default for TrainConfig {
    fn default() -> TrainConfig {
        TrainConfig {
            hidden_size: None,
            epochs: 8000,
            learning_rate: 10.0,
            seed: 42,
            threshold: 0.5,
        }
    }
}

impl TrainConfig {
    fn hidden_for(&self, nfacts: usize) -> usize {
        self.hidden_size.unwrap_or_else(|| nfacts.max(16))
    }
}

#[derive(Debug)]
pub enum TrainError {
    EmptyDb,
    DivergedLoss { epoch: usize, loss: f64 },
    BadThreshold(f64),
}

impl fmt::Display for TrainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainError::EmptyDb => write!(f, "cannot train an indexer over an empty database"),
            TrainError::DivergedLoss { epoch, loss } => {
                write!(f, "training loss became non-finite at epoch {epoch}: {loss}")
            }
            TrainError::BadThreshold(t) => {
                write!(f, "threshold must lie strictly between 0 and 1, got {t}")
            }
        }
    }
}

impl std::error::Error for TrainError {}

/// The distinct constants of a database in constant order; a constant's
/// position is its input feature index.
#[derive(Clone, Debug)]
pub struct Vocab {
    constants: Vec<Constant>,
    positions: HashMap<Constant, usize>,
}

impl Vocab {
    pub fn from_db(db: &FactDb) -> Vocab {
        let constants = db.constants();
        let positions = constants.iter().cloned().zip(0..).collect();
        Vocab { constants, positions }
    }

    pub fn len(&self) -> usize {
        self.constants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constants.is_empty()
    }

    pub fn position(&self, c: &Constant) -> Option<usize> {
        self.positions.get(c).copied()
    }

    pub fn constant(&self, i: usize) -> &Constant {
        &self.constants[i]
    }

    /// Multi-hot encoding: 1.0 at the position of each known constant.
    /// Unknown constants contribute nothing.
    pub fn encode<'a>(&self, cs: impl IntoIterator<Item = &'a Constant>) -> Vec<f64> {
        let mut x = vec![0.0; self.constants.len()];
        for c in cs {
            if let Some(i) = self.position(c) {
                x[i] = 1.0;
            }
        }
        x
    }
}

/// Dense row-major matrix of network activations or weights.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// The identity; the training input over a vocabulary of size `n`.
    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }
}

/// Training set for a database: `x` is the identity over the vocabulary,
/// row k of `y` is the multi-hot of the facts containing constant k.
pub fn build_training_set(db: &FactDb, vocab: &Vocab) -> Result<(Matrix, Matrix), TrainError> {
    if db.is_empty() {
        return Err(TrainError::EmptyDb);
    }
    let x = Matrix::identity(vocab.len());
    let mut y = Matrix::zeros(vocab.len(), db.len());
    for k in 0..vocab.len() {
        let row = y.row_mut(k);
        for &id in db.facts_containing(vocab.constant(k)) {
            row[id] = 1.0;
        }
    }
    Ok((x, y))
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

// Cross-entropy from the logit, numerically stable for either label.
fn bce_from_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

/// One-hidden-layer perceptron with logistic activations on both layers.
#[derive(Clone, Debug)]
pub struct Mlp {
    /// `hidden x inputs`
    pub w1: Matrix,
    pub b1: Vec<f64>,
    /// `outputs x hidden`
    pub w2: Matrix,
    pub b2: Vec<f64>,
}

/// Parameter gradients, shaped like the model.
#[derive(Clone, Debug)]
pub struct Gradients {
    pub w1: Matrix,
    pub b1: Vec<f64>,
    pub w2: Matrix,
    pub b2: Vec<f64>,
}

impl Mlp {
    /// Uniform Glorot initialization from a seeded generator; the same seed
    /// always gives bit-identical weights.
    pub fn seeded(inputs: usize, hidden: usize, outputs: usize, seed: u64) -> Mlp {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut init = |rows: usize, cols: usize| {
            let bound = (6.0 / (rows + cols) as f64).sqrt();
            let mut m = Matrix::zeros(rows, cols);
            for v in &mut m.data {
                *v = rng.gen_range(-bound..bound);
            }
            m
        };
        let w1 = init(hidden, inputs);
        let w2 = init(outputs, hidden);
        Mlp { w1, b1: vec![0.0; hidden], w2, b2: vec![0.0; outputs] }
    }

    /// Seeded initialization tuned for index memorization over one-hot
    /// inputs: a wide first layer so each input column starts with a
    /// distinctive hidden code, and output biases at the label base rates.
    /// Deterministic given the seed.
    pub fn seeded_for_targets(inputs: usize, hidden: usize, seed: u64, y: &Matrix) -> Mlp {
        let outputs = y.cols;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut mlp = Mlp {
            w1: Matrix::zeros(hidden, inputs),
            b1: vec![0.0; hidden],
            w2: Matrix::zeros(outputs, hidden),
            b2: vec![0.0; outputs],
        };
        for v in &mut mlp.w1.data {
            *v = rng.gen_range(-2.0..2.0);
        }
        for v in &mut mlp.w2.data {
            *v = rng.gen_range(-1.0..1.0);
        }
        for m in 0..outputs {
            let base: f64 = (0..y.rows).map(|s| y.at(s, m)).sum::<f64>() / y.rows.max(1) as f64;
            let p = base.clamp(1e-3, 1.0 - 1e-3);
            mlp.b2[m] = (p / (1.0 - p)).ln();
        }
        mlp
    }

    pub fn inputs(&self) -> usize {
        self.w1.cols
    }

    pub fn hidden(&self) -> usize {
        self.w1.rows
    }

    pub fn outputs(&self) -> usize {
        self.w2.rows
    }

    fn hidden_activations(&self, x: &[f64], h: &mut Vec<f64>) {
        h.clear();
        for j in 0..self.hidden() {
            let row = self.w1.row(j);
            let z: f64 = self.b1[j] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
            h.push(sigmoid(z));
        }
    }

    fn output_logits(&self, h: &[f64], z: &mut Vec<f64>) {
        z.clear();
        for m in 0..self.outputs() {
            let row = self.w2.row(m);
            z.push(self.b2[m] + row.iter().zip(h).map(|(w, v)| w * v).sum::<f64>());
        }
    }

    /// Output probabilities for one input vector, strictly inside (0, 1).
    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.inputs(), "input length mismatch");
        let mut h = Vec::with_capacity(self.hidden());
        let mut z = Vec::with_capacity(self.outputs());
        self.hidden_activations(x, &mut h);
        self.output_logits(&h, &mut z);
        z.iter().map(|&z| sigmoid(z).clamp(1e-15, 1.0 - 1e-15)).collect()
    }

    /// Mean over samples of the summed binary cross-entropy per sample.
    pub fn loss(&self, x: &Matrix, y: &Matrix) -> f64 {
        let mut h = Vec::new();
        let mut z = Vec::new();
        let mut total = 0.0;
        for s in 0..x.rows {
            self.hidden_activations(x.row(s), &mut h);
            self.output_logits(&h, &mut z);
            for (m, &zm) in z.iter().enumerate() {
                total += bce_from_logit(zm, y.at(s, m));
            }
        }
        total / x.rows as f64
    }

    /// Loss and its analytic gradients over the full batch.
    pub fn loss_gradients(&self, x: &Matrix, y: &Matrix) -> (f64, Gradients) {
        let nsamples = x.rows;
        let mut grads = Gradients {
            w1: Matrix::zeros(self.hidden(), self.inputs()),
            b1: vec![0.0; self.hidden()],
            w2: Matrix::zeros(self.outputs(), self.hidden()),
            b2: vec![0.0; self.outputs()],
        };
        // Inputs are typically one-hot rows; walking nonzeros keeps the
        // first layer proportional to their count.
        let sparse_rows: Vec<Vec<(usize, f64)>> = (0..nsamples)
            .map(|s| {
                x.row(s)
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0.0)
                    .map(|(i, &v)| (i, v))
                    .collect()
            })
            .collect();

        let mut h = Vec::new();
        let mut z = Vec::new();
        let mut dz = vec![0.0; self.outputs()];
        let mut dh = vec![0.0; self.hidden()];
        let mut total = 0.0;

        for (s, nonzero) in sparse_rows.iter().enumerate() {
            h.clear();
            for j in 0..self.hidden() {
                let row = self.w1.row(j);
                let pre: f64 =
                    self.b1[j] + nonzero.iter().map(|&(i, v)| row[i] * v).sum::<f64>();
                h.push(sigmoid(pre));
            }
            self.output_logits(&h, &mut z);
            for (m, (slot, &zm)) in dz.iter_mut().zip(&z).enumerate() {
                let label = y.at(s, m);
                total += bce_from_logit(zm, label);
                *slot = sigmoid(zm) - label;
            }
            for (m, &dzm) in dz.iter().enumerate() {
                let grad_row = grads.w2.row_mut(m);
                for (g, &hj) in grad_row.iter_mut().zip(&h) {
                    *g += dzm * hj;
                }
                grads.b2[m] += dzm;
            }
            dh.iter_mut().for_each(|v| *v = 0.0);
            for (m, &dzm) in dz.iter().enumerate() {
                let row = self.w2.row(m);
                for (slot, &w) in dh.iter_mut().zip(row) {
                    *slot += dzm * w;
                }
            }
            for (slot, &hj) in dh.iter_mut().zip(&h) {
                *slot *= hj * (1.0 - hj);
            }
            for (j, &dhj) in dh.iter().enumerate() {
                let grad_row = grads.w1.row_mut(j);
                for &(i, v) in nonzero {
                    grad_row[i] += dhj * v;
                }
                grads.b1[j] += dhj;
            }
        }

        let scale = 1.0 / nsamples as f64;
        for g in grads
            .w1
            .data
            .iter_mut()
            .chain(&mut grads.b1)
            .chain(&mut grads.w2.data)
            .chain(&mut grads.b2)
        {
            *g *= scale;
        }
        (total * scale, grads)
    }

    /// Full-batch gradient descent for `cfg.epochs` epochs; returns the
    /// post-training loss. Deterministic given `cfg.seed` (the seed fixes
    /// the initial weights; full batches need no shuffling).
    pub fn fit(&mut self, x: &Matrix, y: &Matrix, cfg: &TrainConfig) -> Result<f64, TrainError> {
        for epoch in 0..cfg.epochs {
            let (loss, grads) = self.loss_gradients(x, y);
            if !loss.is_finite() {
                return Err(TrainError::DivergedLoss { epoch, loss });
            }
            let lr = cfg.learning_rate;
            for (w, g) in self.w1.data.iter_mut().zip(&grads.w1.data) {
                *w -= lr * g;
            }
            for (b, g) in self.b1.iter_mut().zip(&grads.b1) {
                *b -= lr * g;
            }
            for (w, g) in self.w2.data.iter_mut().zip(&grads.w2.data) {
                *w -= lr * g;
            }
            for (b, g) in self.b2.iter_mut().zip(&grads.b2) {
                *b -= lr * g;
            }
        }
        let final_loss = self.loss(x, y);
        if !final_loss.is_finite() {
            return Err(TrainError::DivergedLoss { epoch: cfg.epochs, loss: final_loss });
        }
        Ok(final_loss)
    }
}

/// Drop-in replacement for the symbolic indexers: thresholded network
/// predictions produce the candidate set, validated downstream by ground
/// unification.
#[derive(Clone, Debug)]
pub struct NeuralIndexer {
    vocab: Vocab,
    mlp: Mlp,
    threshold: f64,
    nfacts: usize,
    seed: u64,
}

impl NeuralIndexer {
    /// Seeded initial weights without any training. Candidate sets are
    /// arbitrary, yet downstream answers stay sound.
    pub fn untrained(db: &FactDb, cfg: &TrainConfig) -> Result<NeuralIndexer, TrainError> {
        if db.is_empty() {
            return Err(TrainError::EmptyDb);
        }
        check_threshold(cfg.threshold)?;
        let vocab = Vocab::from_db(db);
        let (_, y) = build_training_set(db, &vocab)?;
        let mlp = Mlp::seeded_for_targets(vocab.len(), cfg.hidden_for(db.len()), cfg.seed, &y);
        Ok(NeuralIndexer {
            vocab,
            mlp,
            threshold: cfg.threshold,
            nfacts: db.len(),
            seed: cfg.seed,
        })
    }

    /// Fits the network to the database's constant index; returns the
    /// indexer and the final training loss.
    pub fn train(db: &FactDb, cfg: &TrainConfig) -> Result<(NeuralIndexer, f64), TrainError> {
        let mut indexer = NeuralIndexer::untrained(db, cfg)?;
        let (x, y) = build_training_set(db, &indexer.vocab)?;
        let loss = indexer.mlp.fit(&x, &y, cfg)?;
        Ok((indexer, loss))
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn mlp(&self) -> &Mlp {
        &self.mlp
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn fact_count(&self) -> usize {
        self.nfacts
    }

    /// Fact ids whose predicted probability clears the threshold, ascending.
    pub fn predicted_facts(&self, constants: &[Constant]) -> Vec<FactId> {
        let x = self.vocab.encode(constants.iter());
        self.mlp
            .predict(&x)
            .iter()
            .enumerate()
            .filter(|(_, &p)| p >= self.threshold)
            .map(|(id, _)| id)
            .collect()
    }

    /// Writes the model as a versioned JSON weight file.
    pub fn save(&self, path: &FsPath) -> Result<(), ModelFileError> {
        let file = ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            inputs: self.mlp.inputs(),
            hidden: self.mlp.hidden(),
            outputs: self.mlp.outputs(),
            seed: self.seed,
            threshold: self.threshold,
            w1: self.mlp.w1.data.clone(),
            b1: self.mlp.b1.clone(),
            w2: self.mlp.w2.data.clone(),
            b2: self.mlp.b2.clone(),
        };
        let text = serde_json::to_string(&file).map_err(|e| ModelFileError::Format(e.to_string()))?;
        fs::write(path, text)?;
        Ok(())
    }

    /// Reads a weight file back for the database it was trained on; the
    /// vocabulary is rebuilt from the database and checked against the
    /// stored dimensions.
    pub fn load(path: &FsPath, db: &FactDb) -> Result<NeuralIndexer, ModelFileError> {
        let text = fs::read_to_string(path)?;
        let file: ModelFile =
            serde_json::from_str(&text).map_err(|e| ModelFileError::Format(e.to_string()))?;
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(ModelFileError::Version(file.format_version));
        }
        let vocab = Vocab::from_db(db);
        if file.inputs != vocab.len() || file.outputs != db.len() {
            return Err(ModelFileError::Format(format!(
                "model dimensions {}x{} do not fit a database with {} constants and {} facts",
                file.inputs,
                file.outputs,
                vocab.len(),
                db.len()
            )));
        }
        let expect = |name: &str, got: usize, want: usize| {
            if got == want {
                Ok(())
            } else {
                Err(ModelFileError::Format(format!("{name} has {got} values, expected {want}")))
            }
        };
        expect("w1", file.w1.len(), file.hidden * file.inputs)?;
        expect("b1", file.b1.len(), file.hidden)?;
        expect("w2", file.w2.len(), file.outputs * file.hidden)?;
        expect("b2", file.b2.len(), file.outputs)?;
        let mlp = Mlp {
            w1: Matrix { rows: file.hidden, cols: file.inputs, data: file.w1 },
            b1: file.b1,
            w2: Matrix { rows: file.outputs, cols: file.hidden, data: file.w2 },
            b2: file.b2,
        };
        Ok(NeuralIndexer {
            vocab,
            mlp,
            threshold: file.threshold,
            nfacts: db.len(),
            seed: file.seed,
        })
    }
}

impl Indexer for NeuralIndexer {
    fn ground_match_of(&self, db: &FactDb, query: &Term) -> Vec<FactId> {
        let constants = query.constants();
        if constants.is_empty() {
            return (0..db.len()).collect();
        }
        // a constant the database has never seen cannot occur in any fact
        if constants.iter().any(|c| self.vocab.position(c).is_none()) {
            return Vec::new();
        }
        let known: Vec<Constant> = constants.into_iter().collect();
        self.predicted_facts(&known).into_iter().filter(|&id| id < db.len()).collect()
    }
}

const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    inputs: usize,
    hidden: usize,
    outputs: usize,
    seed: u64,
    threshold: f64,
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: Vec<f64>,
}

#[derive(Debug)]
pub enum ModelFileError {
    Io(std::io::Error),
    Format(String),
    Version(u32),
}

impl fmt::Display for ModelFileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelFileError::Io(e) => write!(f, "{e}"),
            ModelFileError::Format(m) => write!(f, "bad model file: {m}"),
            ModelFileError::Version(v) => write!(f, "unsupported model format version {v}"),
        }
    }
}

impl std::error::Error for ModelFileError {}

impl From<std::io::Error> for ModelFileError {
    fn from(e: std::io::Error) -> ModelFileError {
        ModelFileError::Io(e)
    }
}

fn check_threshold(t: f64) -> Result<(), TrainError> {
    if t > 0.0 && t < 1.0 {
        Ok(())
    } else {
        Err(TrainError::BadThreshold(t))
    }
}
