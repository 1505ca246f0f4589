//! Joint belief-propagation syndrome decoding for CSS codes under
//! depolarizing noise.
//!
//! The x-bits are decoded on the Tanner graph of `H_Z` (targets `s`) and the
//! z-bits on the Tanner graph of `H_X` (targets `t`). Both graphs run a
//! flooding sum-product schedule; they are coupled through the channel term,
//! which conditions each qubit's x-prior on the current z-evidence and vice
//! versa, so that the correlation introduced by `Y` errors is used.
//!
//! LLRs are `ln(P(bit = 0) / P(bit = 1))`.

use crate::channel::{depolarizing_prior, JointPrior, Syndrome};
use crate::code::QuantumQcCode;
use crate::error::{Error, Result};
use crate::gf2::{BitVector, SparseBinaryMatrix};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecoderConfig {
    pub max_iterations: usize,
    /// Bound on every check and variable message magnitude.
    pub llr_clip: f64,
    /// Weight of the previous check-to-variable message, in `[0, 1)`.
    pub damping: f64,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            llr_clip: 25.0,
            damping: 0.0,
        }
    }
}

impl DecoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be at least 1"));
        }
        if !(self.llr_clip > 0.0 && self.llr_clip.is_finite()) {
            return Err(Error::invalid("llr_clip must be positive and finite"));
        }
        if !(0.0..1.0).contains(&self.damping) {
            return Err(Error::invalid("damping must lie in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub x_hat: BitVector,
    pub z_hat: BitVector,
    pub converged: bool,
    pub iterations: usize,
}

/// Compressed adjacency of one Tanner graph, edges ordered by check.
#[derive(Clone, Debug)]
struct TannerGraph {
    check_start: Vec<usize>,
    edge_var: Vec<usize>,
    var_start: Vec<usize>,
    /// Edge ids grouped by variable.
    var_edges: Vec<usize>,
}

impl TannerGraph {
    fn new(h: &SparseBinaryMatrix) -> Self {
        let mut check_start = Vec::with_capacity(h.rows() + 1);
        let mut edge_var = Vec::with_capacity(h.nnz());
        check_start.push(0);
        for r in 0..h.rows() {
            edge_var.extend_from_slice(h.row(r));
            check_start.push(edge_var.len());
        }
        let mut var_start = vec![0; h.cols() + 1];
        for &v in &edge_var {
            var_start[v + 1] += 1;
        }
        for v in 0..h.cols() {
            var_start[v + 1] += var_start[v];
        }
        let mut fill = var_start.clone();
        let mut var_edges = vec![0; edge_var.len()];
        for (e, &v) in edge_var.iter().enumerate() {
            var_edges[fill[v]] = e;
            fill[v] += 1;
        }
        Self {
            check_start,
            edge_var,
            var_start,
            var_edges,
        }
    }

    fn checks(&self) -> usize {
        self.check_start.len() - 1
    }

    fn edges(&self) -> usize {
        self.edge_var.len()
    }

    fn check_edges(&self, c: usize) -> std::ops::Range<usize> {
        self.check_start[c]..self.check_start[c + 1]
    }

    fn var_edge_ids(&self, v: usize) -> &[usize] {
        &self.var_edges[self.var_start[v]..self.var_start[v + 1]]
    }
}

/// Message state for one of the two graphs.
#[derive(Clone, Debug)]
struct Side {
    graph: TannerGraph,
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    /// Sum of incoming check messages per variable.
    totals: Vec<f64>,
    posterior: Vec<f64>,
    hard: Vec<bool>,
    target: Vec<bool>,
}

impl Side {
    fn new(h: &SparseBinaryMatrix) -> Self {
        let graph = TannerGraph::new(h);
        let n = h.cols();
        Self {
            v2c: vec![0.0; graph.edges()],
            c2v: vec![0.0; graph.edges()],
            totals: vec![0.0; n],
            posterior: vec![0.0; n],
            hard: vec![false; n],
            target: vec![false; graph.checks()],
            graph,
        }
    }

    fn reset(&mut self, target: &BitVector) {
        self.v2c.iter_mut().for_each(|m| *m = 0.0);
        self.c2v.iter_mut().for_each(|m| *m = 0.0);
        self.totals.iter_mut().for_each(|m| *m = 0.0);
        for (c, t) in self.target.iter_mut().enumerate() {
            *t = target.get(c);
        }
    }

    fn update_variables(&mut self, channel: &[f64], clip: f64) {
        for (v, &lambda) in channel.iter().enumerate() {
            let base = lambda + self.totals[v];
            for &e in self.graph.var_edge_ids(v) {
                self.v2c[e] = (base - self.c2v[e]).clamp(-clip, clip);
            }
        }
    }

    fn update_checks(&mut self, clip: f64, damping: f64, scratch: &mut Scratch) {
        const EDGE: f64 = 1.0 - f64::EPSILON;
        let Scratch { tanh, suffix } = scratch;
        for c in 0..self.graph.checks() {
            let edges = self.graph.check_edges(c);
            let degree = edges.len();
            tanh.clear();
            tanh.extend(self.v2c[edges.clone()].iter().map(|&m| (0.5 * m).tanh()));
            suffix.clear();
            suffix.resize(degree + 1, 1.0);
            for k in (0..degree).rev() {
                suffix[k] = suffix[k + 1] * tanh[k];
            }
            let sign = if self.target[c] { -1.0 } else { 1.0 };
            let mut prefix = 1.0;
            for (k, e) in edges.enumerate() {
                let product = (sign * prefix * suffix[k + 1]).clamp(-EDGE, EDGE);
                let fresh = (2.0 * product.atanh()).clamp(-clip, clip);
                self.c2v[e] = if damping > 0.0 {
                    (1.0 - damping) * fresh + damping * self.c2v[e]
                } else {
                    fresh
                };
                prefix *= tanh[k];
            }
        }
        for v in 0..self.totals.len() {
            self.totals[v] = self.graph.var_edge_ids(v).iter().map(|&e| self.c2v[e]).sum();
        }
    }

    fn decide(&mut self, channel: &[f64], clip: f64) {
        for (v, &lambda) in channel.iter().enumerate().take(self.totals.len()) {
            let llr = lambda + self.totals[v].clamp(-clip, clip);
            self.posterior[v] = llr;
            self.hard[v] = llr < 0.0;
        }
    }

    fn syndrome_matches(&self) -> bool {
        (0..self.graph.checks()).all(|c| {
            let parity = self
                .graph
                .check_edges(c)
                .filter(|&e| self.hard[self.graph.edge_var[e]])
                .count()
                & 1;
            (parity == 1) == self.target[c]
        })
    }

    fn hard_vector(&self) -> BitVector {
        BitVector::from_bools(&self.hard)
    }
}

#[derive(Clone, Debug, Default)]
struct Scratch {
    tanh: Vec<f64>,
    suffix: Vec<f64>,
}

/// Channel terms of the depolarizing prior, conditioned on the other graph's
/// evidence.
#[derive(Clone, Copy, Debug)]
struct ChannelTerms {
    prior: JointPrior,
}

#[cfg(test)]
fn log_add_exp(a: f64, b: f64) -> f64 {
    let hi = a.max(b);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (-(a - b).abs()).exp().ln_1p()
}

/// `ln[(a + b e^{-evidence}) / (c + d e^{-evidence})]` without overflow:
/// for negative evidence both sides are scaled by `e^{evidence}`.
#[inline]
fn ratio_term(a: f64, b: f64, c: f64, d: f64, evidence: f64) -> f64 {
    if evidence >= 0.0 {
        let u = (-evidence).exp();
        ((a + b * u) / (c + d * u)).ln()
    } else {
        let w = evidence.exp();
        ((a * w + b) / (c * w + d)).ln()
    }
}

impl ChannelTerms {
    fn new(prior: &JointPrior) -> Self {
        Self { prior: *prior }
    }

    /// `ln[(p_i + p_z e^{-Λz}) / (p_x + p_y e^{-Λz})]`.
    fn x_term(&self, z_evidence: f64) -> f64 {
        let p = &self.prior;
        ratio_term(p.p_i, p.p_z, p.p_x, p.p_y, z_evidence)
    }

    /// `ln[(p_i + p_x e^{-Λx}) / (p_z + p_y e^{-Λx})]`.
    fn z_term(&self, x_evidence: f64) -> f64 {
        let p = &self.prior;
        ratio_term(p.p_i, p.p_x, p.p_z, p.p_y, x_evidence)
    }
}

/// Reusable joint BP decoder bound to one `(H_X, H_Z)` pair.
///
/// Besides [`JointBpDecoder::decode`], the state can be driven step by step
/// with [`JointBpDecoder::initialize`] and [`JointBpDecoder::iterate`] to
/// inspect [`JointBpDecoder::posterior_llrs`] between iterations.
#[derive(Clone, Debug)]
pub struct JointBpDecoder {
    cfg: DecoderConfig,
    n: usize,
    /// x-bits on the `H_Z` graph.
    x_side: Side,
    /// z-bits on the `H_X` graph.
    z_side: Side,
    x_channel: Vec<f64>,
    z_channel: Vec<f64>,
    prior: Option<ChannelTerms>,
    iterations: usize,
    converged: bool,
    scratch: Scratch,
}

impl JointBpDecoder {
    pub fn new(h_x: &SparseBinaryMatrix, h_z: &SparseBinaryMatrix, cfg: DecoderConfig) -> Result<Self> {
        cfg.validate()?;
        if h_x.cols() != h_z.cols() {
            return Err(Error::invalid("H_X and H_Z have different lengths"));
        }
        let n = h_x.cols();
        Ok(Self {
            cfg,
            n,
            x_side: Side::new(h_z),
            z_side: Side::new(h_x),
            x_channel: vec![0.0; n],
            z_channel: vec![0.0; n],
            prior: None,
            iterations: 0,
            converged: false,
            scratch: Scratch::default(),
        })
    }

    pub fn for_code(code: &QuantumQcCode, cfg: DecoderConfig) -> Result<Self> {
        Self::new(code.h_x(), code.h_z(), cfg)
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.cfg
    }

    /// Resets all messages for a new syndrome and makes the prior-only hard
    /// decision. Returns whether that decision already satisfies the syndrome.
    pub fn initialize(&mut self, syn: &Syndrome, p_d: f64) -> Result<bool> {
        if syn.s.len() != self.x_side.graph.checks() || syn.t.len() != self.z_side.graph.checks() {
            return Err(Error::invalid(format!(
                "syndrome lengths ({}, {}) do not match check counts ({}, {})",
                syn.s.len(),
                syn.t.len(),
                self.x_side.graph.checks(),
                self.z_side.graph.checks()
            )));
        }
        let prior = depolarizing_prior(p_d)?;
        self.x_side.reset(&syn.s);
        self.z_side.reset(&syn.t);
        self.iterations = 0;
        if p_d == 0.0 {
            // all prior mass on the identity
            self.prior = None;
            for side in [&mut self.x_side, &mut self.z_side] {
                side.hard.iter_mut().for_each(|b| *b = false);
                side.posterior.iter_mut().for_each(|l| *l = self.cfg.llr_clip);
            }
            self.converged = syn.is_zero();
            return Ok(self.converged);
        }
        self.prior = Some(ChannelTerms::new(&prior));
        self.refresh_channel();
        self.decide();
        self.converged = self.syndrome_matches();
        Ok(self.converged)
    }

    fn refresh_channel(&mut self) {
        let prior = self.prior.expect("initialized with p_d > 0");
        for v in 0..self.n {
            self.x_channel[v] = prior.x_term(self.z_side.totals[v]);
            self.z_channel[v] = prior.z_term(self.x_side.totals[v]);
        }
    }

    fn decide(&mut self) {
        let clip = self.cfg.llr_clip;
        self.x_side.decide(&self.x_channel, clip);
        self.z_side.decide(&self.z_channel, clip);
    }

    fn syndrome_matches(&self) -> bool {
        self.x_side.syndrome_matches() && self.z_side.syndrome_matches()
    }

    /// Runs one flooding iteration on both graphs, then the hard decision and
    /// syndrome check. Returns whether the estimate matches the syndrome.
    /// Does nothing once converged or when the prior is degenerate.
    pub fn iterate(&mut self) -> bool {
        if self.converged || self.prior.is_none() {
            return self.converged;
        }
        let clip = self.cfg.llr_clip;
        // channel terms from the previous iteration's evidence
        self.x_side.update_variables(&self.x_channel, clip);
        self.z_side.update_variables(&self.z_channel, clip);
        self.x_side
            .update_checks(clip, self.cfg.damping, &mut self.scratch);
        self.z_side
            .update_checks(clip, self.cfg.damping, &mut self.scratch);
        self.refresh_channel();
        self.decide();
        self.iterations += 1;
        self.converged = self.syndrome_matches();
        self.converged
    }

    /// Hard-decision LLRs `(x, z)` from the most recent decision.
    pub fn posterior_llrs(&self) -> (&[f64], &[f64]) {
        (&self.x_side.posterior, &self.z_side.posterior)
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn outcome(&self) -> DecodeOutcome {
        DecodeOutcome {
            x_hat: self.x_side.hard_vector(),
            z_hat: self.z_side.hard_vector(),
            converged: self.converged,
            iterations: self.iterations,
        }
    }

    pub fn decode(&mut self, syn: &Syndrome, p_d: f64) -> Result<DecodeOutcome> {
        if self.initialize(syn, p_d)? || self.prior.is_none() {
            return Ok(self.outcome());
        }
        while self.iterations < self.cfg.max_iterations {
            if self.iterate() {
                break;
            }
        }
        Ok(self.outcome())
    }
}

/// One-shot decode; allocates a fresh decoder.
pub fn decode(code: &QuantumQcCode, syn: &Syndrome, p_d: f64, cfg: DecoderConfig) -> Result<DecodeOutcome> {
    JointBpDecoder::for_code(code, cfg)?.decode(syn, p_d)
}
