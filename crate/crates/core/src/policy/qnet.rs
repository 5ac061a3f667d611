//! Dueling Q-network: a rectified feed-forward trunk followed by a scalar
//! state-value head `V(s)` and an advantage head `A(s, ·)`, combined as
//! `Q(s, a) = V(s) + A(s, a) - mean_b A(s, b)`.
//!
//! Parameters live in one flat vector: for each trunk layer its row-major
//! weight matrix then its bias, then the value head, then the advantage
//! head. Gradients and optimizer state use the same layout.
//!
//! # File format
//!
//! ```text
//! "ADVQ"                 4 bytes magic
//! version                u32 LE (currently 1)
//! layer count L          u32 LE (input, hidden..., actions)
//! dims                   L x u32 LE
//! parameter count P      u64 LE
//! parameters             P x f64 LE, in the flat layout above
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::PolicyError;
use crate::Scalar;

const MAGIC: &[u8; 4] = b"ADVQ";
const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug)]
struct Layer {
    input: usize,
    output: usize,
    offset: usize,
}

impl Layer {
    fn weights(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.input * self.output
    }

    fn biases(&self) -> std::ops::Range<usize> {
        let start = self.offset + self.input * self.output;
        start..start + self.output
    }

    fn len(&self) -> usize {
        self.input * self.output + self.output
    }

    /// `out = W x + b`
    fn apply<S: Scalar>(&self, params: &[S], x: &[S], out: &mut Vec<S>) {
        let w = &params[self.weights()];
        let b = &params[self.biases()];
        out.clear();
        out.extend(w.chunks_exact(self.input).zip(b).map(|(row, bias)| {
            row.iter().zip(x).fold(*bias, |acc, (wi, xi)| acc + *wi * *xi)
        }));
    }

    /// Accumulates parameter gradients for upstream gradient `dy` at input
    /// `x`, returning the gradient with respect to `x` when asked.
    fn backward<S: Scalar>(&self, params: &[S], x: &[S], dy: &[S], grad: &mut [S], want_dx: bool) -> Vec<S> {
        let (gw, rest) = grad[self.offset..self.offset + self.len()].split_at_mut(self.input * self.output);
        for (o, d) in dy.iter().enumerate() {
            if *d == S::zero() {
                continue;
            }
            let row = &mut gw[o * self.input..(o + 1) * self.input];
            for (g, xi) in row.iter_mut().zip(x) {
                *g += *d * *xi;
            }
            rest[o] += *d;
        }
        if !want_dx {
            return Vec::new();
        }
        let w = &params[self.weights()];
        let mut dx = vec![S::zero(); self.input];
        for (o, d) in dy.iter().enumerate() {
            if *d == S::zero() {
                continue;
            }
            for (dxi, wi) in dx.iter_mut().zip(&w[o * self.input..(o + 1) * self.input]) {
                *dxi += *d * *wi;
            }
        }
        dx
    }
}

/// Activations kept from a forward pass for backpropagation.
#[derive(Clone, Debug)]
pub struct ForwardCache<S> {
    /// Input of each trunk layer followed by the trunk output.
    activations: Vec<Vec<S>>,
    pub value: S,
    pub advantages: Vec<S>,
    pub q: Vec<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DuelingQNetwork<S> {
    input_dim: usize,
    hidden: Vec<usize>,
    n_actions: usize,
    params: Vec<S>,
}

impl<S: Scalar> DuelingQNetwork<S> {
    /// All-zero network; every Q-value is 0.
    pub fn zeros(input_dim: usize, hidden: &[usize], n_actions: usize) -> Self {
        let mut net = DuelingQNetwork { input_dim, hidden: hidden.to_vec(), n_actions, params: Vec::new() };
        net.params = vec![S::zero(); net.layers().iter().map(Layer::len).sum()];
        net
    }

    /// He-uniform trunk weights, small uniform head weights, zero biases.
    pub fn new<R: Rng + ?Sized>(input_dim: usize, hidden: &[usize], n_actions: usize, rng: &mut R) -> Self {
        let mut net = Self::zeros(input_dim, hidden, n_actions);
        let layers = net.layers();
        let trunk = layers.len() - 2;
        for (i, layer) in layers.iter().enumerate() {
            let limit = if i < trunk {
                (6.0 / layer.input as f64).sqrt()
            } else {
                (1.0 / layer.input as f64).sqrt()
            };
            for p in &mut net.params[layer.weights()] {
                *p = S::of(rng.random_range(-limit..limit));
            }
        }
        net
    }

    pub fn from_params(input_dim: usize, hidden: &[usize], n_actions: usize, params: Vec<S>) -> Result<Self, PolicyError> {
        let mut net = Self::zeros(input_dim, hidden, n_actions);
        if params.len() != net.params.len() {
            return Err(PolicyError::DimensionMismatch { expected: net.params.len(), actual: params.len() });
        }
        net.params = params;
        Ok(net)
    }

    fn layers(&self) -> Vec<Layer> {
        let mut layers = Vec::with_capacity(self.hidden.len() + 2);
        let mut offset = 0;
        let mut input = self.input_dim;
        for &h in &self.hidden {
            let layer = Layer { input, output: h, offset };
            offset += layer.len();
            layers.push(layer);
            input = h;
        }
        let value = Layer { input, output: 1, offset };
        offset += value.len();
        layers.push(value);
        layers.push(Layer { input, output: self.n_actions, offset });
        layers
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn hidden(&self) -> &[usize] {
        &self.hidden
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[S] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [S] {
        &mut self.params
    }

    /// Sets the value-head bias and the advantage-head biases, zeroing both
    /// heads' weights, so that `V` and `A` are constant.
    pub fn set_heads(&mut self, value: S, advantages: &[S]) {
        assert_eq!(advantages.len(), self.n_actions);
        let layers = self.layers();
        let (v, a) = (layers[layers.len() - 2], layers[layers.len() - 1]);
        for p in &mut self.params[v.weights()] {
            *p = S::zero();
        }
        for p in &mut self.params[a.weights()] {
            *p = S::zero();
        }
        self.params[v.biases()][0] = value;
        self.params[a.biases()].copy_from_slice(advantages);
    }

    fn check(&self, s: &[S]) -> Result<(), PolicyError> {
        if s.len() == self.input_dim {
            Ok(())
        } else {
            Err(PolicyError::DimensionMismatch { expected: self.input_dim, actual: s.len() })
        }
    }

    pub fn forward_cached(&self, s: &[S]) -> Result<ForwardCache<S>, PolicyError> {
        self.check(s)?;
        let layers = self.layers();
        let trunk = &layers[..layers.len() - 2];
        let mut activations = Vec::with_capacity(trunk.len() + 1);
        activations.push(s.to_vec());
        let mut buf = Vec::new();
        for layer in trunk {
            layer.apply(&self.params, activations.last().expect("non-empty"), &mut buf);
            for x in buf.iter_mut() {
                if *x < S::zero() {
                    *x = S::zero();
                }
            }
            activations.push(buf.clone());
        }
        let top = activations.last().expect("non-empty");
        let mut v = Vec::new();
        layers[layers.len() - 2].apply(&self.params, top, &mut v);
        let mut advantages = Vec::new();
        layers[layers.len() - 1].apply(&self.params, top, &mut advantages);
        let value = v[0];
        let mean = advantages.iter().fold(S::zero(), |a, b| a + *b) / S::of(self.n_actions as f64);
        let q = advantages.iter().map(|a| value + *a - mean).collect();
        Ok(ForwardCache { activations, value, advantages, q })
    }

    /// `(V(s), A(s, ·))`
    pub fn streams(&self, s: &[S]) -> Result<(S, Vec<S>), PolicyError> {
        let c = self.forward_cached(s)?;
        Ok((c.value, c.advantages))
    }

    pub fn forward(&self, s: &[S]) -> Result<Vec<S>, PolicyError> {
        Ok(self.forward_cached(s)?.q)
    }

    /// Adds `dL/dθ` to `grad` given `dq = dL/dQ(s, ·)` at a cached pass.
    pub fn accumulate_gradient(&self, cache: &ForwardCache<S>, dq: &[S], grad: &mut [S]) {
        assert_eq!(grad.len(), self.params.len());
        assert_eq!(dq.len(), self.n_actions);
        let layers = self.layers();
        let n = layers.len();
        let top = cache.activations.last().expect("non-empty");
        let total = dq.iter().fold(S::zero(), |a, b| a + *b);
        let mean = total / S::of(self.n_actions as f64);
        let da: Vec<S> = dq.iter().map(|d| *d - mean).collect();
        let trunk_empty = n == 2;
        let mut dtop = layers[n - 2].backward(&self.params, top, &[total], grad, !trunk_empty);
        let from_a = layers[n - 1].backward(&self.params, top, &da, grad, !trunk_empty);
        if trunk_empty {
            return;
        }
        for (x, y) in dtop.iter_mut().zip(&from_a) {
            *x += *y;
        }
        let mut dy = dtop;
        for i in (0..n - 2).rev() {
            let out = &cache.activations[i + 1];
            for (d, o) in dy.iter_mut().zip(out) {
                if *o <= S::zero() {
                    *d = S::zero();
                }
            }
            dy = layers[i].backward(&self.params, &cache.activations[i], &dy, grad, i > 0);
        }
    }

    fn dims(&self) -> Vec<usize> {
        std::iter::once(self.input_dim).chain(self.hidden.iter().copied()).chain([self.n_actions]).collect()
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<(), PolicyError> {
        w.write_all(MAGIC)?;
        w.write_u32::<LittleEndian>(FORMAT_VERSION)?;
        let dims = self.dims();
        w.write_u32::<LittleEndian>(dims.len() as u32)?;
        for d in dims {
            w.write_u32::<LittleEndian>(d as u32)?;
        }
        w.write_u64::<LittleEndian>(self.params.len() as u64)?;
        for p in &self.params {
            w.write_f64::<LittleEndian>(p.to_f64_lossy())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self, PolicyError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(PolicyError::Format("bad magic bytes".into()));
        }
        let version = r.read_u32::<LittleEndian>()?;
        if version != FORMAT_VERSION {
            return Err(PolicyError::Format(format!("unsupported version {version}")));
        }
        let count = r.read_u32::<LittleEndian>()? as usize;
        if count < 2 {
            return Err(PolicyError::Format("need at least input and action dims".into()));
        }
        let dims = (0..count).map(|_| r.read_u32::<LittleEndian>().map(|d| d as usize)).collect::<Result<Vec<_>, _>>()?;
        let n_params = r.read_u64::<LittleEndian>()? as usize;
        let expected = Self::zeros(dims[0], &dims[1..count - 1], dims[count - 1]).num_params();
        if n_params != expected {
            return Err(PolicyError::Format(format!("{n_params} parameters, dims imply {expected}")));
        }
        let params = (0..n_params).map(|_| r.read_f64::<LittleEndian>().map(S::of)).collect::<Result<Vec<_>, _>>()?;
        Self::from_params(dims[0], &dims[1..count - 1], dims[count - 1], params)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), PolicyError> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PolicyError> {
        Self::read_from(&mut BufReader::new(File::open(path)?))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    #[default]
    Adam,
}

/// Plain gradient descent or Adam over a flat parameter vector.
#[derive(Clone, Debug)]
pub struct Optimizer<S> {
    kind: OptimizerKind,
    learning_rate: S,
    m: Vec<S>,
    v: Vec<S>,
    t: i32,
}

impl<S: Scalar> Optimizer<S> {
    pub fn new(kind: OptimizerKind, learning_rate: f64, n_params: usize) -> Self {
        let state = if kind == OptimizerKind::Adam { n_params } else { 0 };
        Optimizer { kind, learning_rate: S::of(learning_rate), m: vec![S::zero(); state], v: vec![S::zero(); state], t: 0 }
    }

    pub fn step(&mut self, params: &mut [S], grad: &[S]) {
        match self.kind {
            OptimizerKind::Sgd => {
                for (p, g) in params.iter_mut().zip(grad) {
                    *p -= self.learning_rate * *g;
                }
            }
            OptimizerKind::Adam => {
                let (b1, b2, eps) = (S::of(0.9), S::of(0.999), S::of(1e-8));
                self.t += 1;
                let c1 = S::one() - b1.powi(self.t);
                let c2 = S::one() - b2.powi(self.t);
                for (((p, g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
                    *m = b1 * *m + (S::one() - b1) * *g;
                    *v = b2 * *v + (S::one() - b2) * *g * *g;
                    let mhat = *m / c1;
                    let vhat = *v / c2;
                    *p -= self.learning_rate * mhat / (vhat.sqrt() + eps);
                }
            }
        }
    }
}
