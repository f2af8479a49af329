//! Probabilistic suffix trees over location symbols.
//!
//! A context is stored oldest symbol first, so the suffix of a context is the
//! most recent history. Learning is level-wise: a context of depth `k + 1`
//! is only considered when its depth-`k` suffix was kept, which makes every
//! tree suffix-closed by construction.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::error::{domain, format, Error, Result};
use crate::num::Real;
use crate::symbol::Symbol;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PstParams<T> {
    /// Minimum empirical probability for a context to be kept (P_min).
    pub min_probability: T,
    /// Longest context kept (L_max).
    pub max_depth: usize,
    /// Probability floor added to every symbol (γ).
    pub smoothing: T,
}

impl<T: Real> Default for PstParams<T> {
    fn default() -> Self {
        PstParams {
            min_probability: T::from_f64_lossy(0.02),
            max_depth: 5,
            smoothing: T::from_f64_lossy(0.001),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContextNode<T> {
    /// Empirical probability of the context in the training data.
    pub significance: T,
    /// Smoothed next-symbol distribution, indexed by symbol.
    pub distribution: Vec<T>,
    best: Symbol,
}

impl<T: Real> ContextNode<T> {
    fn new(significance: T, distribution: Vec<T>) -> Self {
        let best = argmax(&distribution);
        ContextNode {
            significance,
            distribution,
            best,
        }
    }

    /// Most probable next symbol; ties go to the smallest symbol id.
    pub fn best(&self) -> Symbol {
        self.best
    }
}

fn argmax<T: Real>(dist: &[T]) -> Symbol {
    let mut best = 0;
    for (i, &p) in dist.iter().enumerate() {
        if p > dist[best] {
            best = i;
        }
    }
    best as Symbol
}

/// Variable-order Markov predictor over an alphabet of `alphabet` symbols.
#[derive(Clone, Debug, PartialEq)]
pub struct PatternTree<T> {
    alphabet: u32,
    params: PstParams<T>,
    nodes: BTreeMap<Vec<Symbol>, ContextNode<T>>,
}

#[derive(Default)]
struct Tally {
    occurrences: usize,
    next: BTreeMap<Symbol, usize>,
}

impl<T: Real> PatternTree<T> {
    /// Learns a tree from one sequence.
    pub fn learn(seq: &[Symbol], alphabet: u32, params: PstParams<T>) -> Result<Self> {
        Self::learn_many(&[seq], alphabet, params)
    }

    /// Learns one tree from several sequences; contexts never straddle two
    /// sequences.
    pub fn learn_many(seqs: &[&[Symbol]], alphabet: u32, params: PstParams<T>) -> Result<Self> {
        validate_params(alphabet, &params)?;
        let total: usize = seqs.iter().map(|s| s.len()).sum();
        if total == 0 {
            return domain("cannot learn a pattern tree from an empty sequence");
        }
        if let Some(&bad) = seqs.iter().flat_map(|s| s.iter()).find(|&&s| s >= alphabet) {
            return domain(format!("symbol {bad} is outside an alphabet of {alphabet}"));
        }

        let mut nodes = BTreeMap::new();
        let mut root_counts = BTreeMap::new();
        for s in seqs {
            for &sym in s.iter() {
                *root_counts.entry(sym).or_insert(0usize) += 1;
            }
        }
        nodes.insert(
            Vec::new(),
            ContextNode::new(T::one(), smooth(&root_counts, alphabet, params.smoothing)),
        );

        for depth in 1..=params.max_depth {
            let mut tallies: HashMap<&[Symbol], Tally> = HashMap::new();
            let mut windows = 0usize;
            for s in seqs {
                if s.len() < depth {
                    continue;
                }
                windows += s.len() - depth + 1;
                for start in 0..=s.len() - depth {
                    let ctx = &s[start..start + depth];
                    if !nodes.contains_key(&ctx[1..]) {
                        continue;
                    }
                    let tally = tallies.entry(ctx).or_default();
                    tally.occurrences += 1;
                    if let Some(&next) = s.get(start + depth) {
                        *tally.next.entry(next).or_insert(0) += 1;
                    }
                }
            }
            let mut kept = 0;
            let windows = T::from_usize_lossy(windows.max(1));
            for (ctx, tally) in tallies {
                let significance = T::from_usize_lossy(tally.occurrences) / windows;
                if significance >= params.min_probability {
                    nodes.insert(
                        ctx.to_vec(),
                        ContextNode::new(significance, smooth(&tally.next, alphabet, params.smoothing)),
                    );
                    kept += 1;
                }
            }
            if kept == 0 {
                break;
            }
        }
        Ok(PatternTree {
            alphabet,
            params,
            nodes,
        })
    }

    pub fn alphabet(&self) -> u32 {
        self.alphabet
    }

    pub fn params(&self) -> &PstParams<T> {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contexts(&self) -> impl Iterator<Item = (&[Symbol], &ContextNode<T>)> {
        self.nodes.iter().map(|(k, v)| (k.as_slice(), v))
    }

    pub fn get(&self, context: &[Symbol]) -> Option<&ContextNode<T>> {
        self.nodes.get(context)
    }

    /// The node for the longest stored suffix of `context`.
    pub fn lookup(&self, context: &[Symbol]) -> &ContextNode<T> {
        let max = context.len().min(self.params.max_depth);
        for k in (1..=max).rev() {
            if let Some(node) = self.nodes.get(&context[context.len() - k..]) {
                return node;
            }
        }
        &self.nodes[&[][..]]
    }

    /// Probability of `next` following `context`.
    pub fn predict(&self, context: &[Symbol], next: Symbol) -> T {
        self.lookup(context)
            .distribution
            .get(next as usize)
            .copied()
            .unwrap_or_else(T::zero)
    }

    /// Most probable symbol after `context`.
    pub fn most_likely(&self, context: &[Symbol]) -> Symbol {
        self.lookup(context).best
    }

    /// Flat text form: a parameter header followed by one
    /// `context<TAB>significance<TAB>distribution` row per context, in
    /// context order. Identical trees serialize to identical bytes.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "pst 1");
        let _ = writeln!(out, "alphabet {}", self.alphabet);
        let _ = writeln!(out, "min_probability {}", self.params.min_probability);
        let _ = writeln!(out, "max_depth {}", self.params.max_depth);
        let _ = writeln!(out, "smoothing {}", self.params.smoothing);
        let _ = writeln!(out, "contexts {}", self.nodes.len());
        for (ctx, node) in &self.nodes {
            if ctx.is_empty() {
                out.push('-');
            } else {
                let parts: Vec<String> = ctx.iter().map(|s| s.to_string()).collect();
                out.push_str(&parts.join(" "));
            }
            let _ = write!(out, "\t{}\t", node.significance);
            for (i, p) in node.distribution.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{p}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let mut header = |key: &str| -> Result<String> {
            let line = lines
                .next()
                .ok_or_else(|| Error::Format(format!("missing {key} line")))?;
            match line.split_once(' ') {
                Some((k, v)) if k == key => Ok(v.to_string()),
                _ => Err(Error::Format(format!("expected {key}, got {line:?}"))),
            }
        };
        if header("pst")? != "1" {
            return format("unsupported pattern tree version");
        }
        let alphabet: u32 = parse(&header("alphabet")?)?;
        let params = PstParams {
            min_probability: parse(&header("min_probability")?)?,
            max_depth: parse(&header("max_depth")?)?,
            smoothing: parse(&header("smoothing")?)?,
        };
        let count: usize = parse(&header("contexts")?)?;
        let mut nodes = BTreeMap::new();
        for line in lines.by_ref().take(count) {
            let mut cols = line.split('\t');
            let (Some(ctx), Some(sig), Some(dist), None) =
                (cols.next(), cols.next(), cols.next(), cols.next())
            else {
                return format(format!("malformed context row {line:?}"));
            };
            let ctx: Vec<Symbol> = if ctx == "-" {
                Vec::new()
            } else {
                ctx.split(' ').map(parse).collect::<Result<_>>()?
            };
            let distribution: Vec<T> = dist.split(' ').map(parse).collect::<Result<_>>()?;
            if distribution.len() != alphabet as usize {
                return format("distribution length does not match the alphabet");
            }
            nodes.insert(ctx, ContextNode::new(parse(sig)?, distribution));
        }
        if nodes.len() != count || !nodes.contains_key(&[][..]) {
            return format("pattern tree rows are incomplete");
        }
        Ok(PatternTree {
            alphabet,
            params,
            nodes,
        })
    }

    /// First four bytes of the SHA-256 of [`to_text`](Self::to_text),
    /// big-endian.
    pub fn digest(&self) -> u32 {
        let hash = Sha256::digest(self.to_text().as_bytes());
        u32::from_be_bytes([hash[0], hash[1], hash[2], hash[3]])
    }
}

fn parse<V: std::str::FromStr>(s: &str) -> Result<V> {
    s.trim()
        .parse()
        .map_err(|_| Error::Format(format!("cannot parse {s:?}")))
}

fn validate_params<T: Real>(alphabet: u32, params: &PstParams<T>) -> Result<()> {
    if alphabet == 0 {
        return domain("alphabet must not be empty");
    }
    let zero = T::zero();
    if !(params.min_probability >= zero && params.min_probability <= T::one()) {
        return domain("min_probability must lie in [0, 1]");
    }
    if !(params.smoothing >= zero)
        || params.smoothing * T::from_usize_lossy(alphabet as usize) >= T::one()
    {
        return domain("smoothing must be non-negative and below 1/|alphabet|");
    }
    Ok(())
}

fn smooth<T: Real>(counts: &BTreeMap<Symbol, usize>, alphabet: u32, gamma: T) -> Vec<T> {
    let n = alphabet as usize;
    let total: usize = counts.values().sum();
    if total == 0 {
        return vec![T::one() / T::from_usize_lossy(n); n];
    }
    let scale = T::one() - gamma * T::from_usize_lossy(n);
    let total = T::from_usize_lossy(total);
    let mut dist = vec![gamma; n];
    for (&s, &c) in counts {
        dist[s as usize] += scale * T::from_usize_lossy(c) / total;
    }
    dist
}
