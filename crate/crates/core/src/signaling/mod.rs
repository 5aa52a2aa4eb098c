//! Bounded signaling-dimension checks.
//!
//! A channel `P(y|x)` with `m` inputs and `n` outputs is simulable with `d`
//! classical symbols and shared randomness iff it is a convex combination of
//! deterministic channels whose image has at most `d` outputs. Membership is
//! decided by a phase-one simplex over those vertices. A failure yields a
//! linear witness `W` with `Σ W·V ≤ β` on every vertex `V` and `Σ W·P > β`.
//!
//! Only finite `(m, n, d)` instances are certified; this is not a
//! computation of the signaling dimension itself.

mod simplex;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{NweError, Result};
use crate::format::sig10;
use crate::gpt::{GptSystem, Measurement, State};

/// Maximum `d^m · n^d` for vertex enumeration.
pub const VERTEX_BOUND: u128 = 100_000;
/// Row-sum tolerance for channels.
pub const ROW_TOL: f64 = 1e-12;
/// Componentwise tolerance for recomposing a channel from its certificate.
pub const RECOMPOSE_TOL: f64 = 1e-7;
/// Smallest witness violation (after normalizing `max |W| = 1`) accepted.
pub const MARGIN_TOL: f64 = 1e-9;

/// Row-stochastic matrix `rows[x][y] = P(y | x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    rows: Vec<Vec<f64>>,
}

impl Channel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows
            .first()
            .map(|r| r.len())
            .ok_or(NweError::Empty("channel rows"))?;
        if n == 0 {
            return Err(NweError::Empty("channel outputs"));
        }
        for row in &rows {
            if row.len() != n {
                return Err(NweError::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            if row.iter().any(|&v| v.is_nan() || v < -ROW_TOL) {
                return Err(NweError::InvalidParameter(
                    "channel entries must be nonnegative".into(),
                ));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > ROW_TOL {
                return Err(NweError::InvalidParameter(format!(
                    "channel row sums to {s}"
                )));
            }
        }
        Ok(Self { rows })
    }

    /// The noiseless `k`-symbol channel.
    pub fn identity(k: usize) -> Result<Self> {
        Self::new(
            (0..k)
                .map(|x| (0..k).map(|y| f64::from(u8::from(x == y))).collect())
                .collect(),
        )
    }

    /// Deterministic channel sending input `x` to `map[x]`.
    pub fn deterministic(map: &[usize], n: usize) -> Result<Self> {
        Self::new(
            map.iter()
                .map(|&y| (0..n).map(|k| f64::from(u8::from(k == y))).collect())
                .collect(),
        )
    }

    pub fn inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn outputs(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.rows[x][y]
    }

    /// `Σ_xy W[x][y] · P(y|x)`.
    pub fn pair(&self, w: &[Vec<f64>]) -> f64 {
        self.rows
            .iter()
            .zip(w)
            .map(|(r, wr)| r.iter().zip(wr).map(|(a, b)| a * b).sum::<f64>())
            .sum()
    }

    /// Largest componentwise difference; infinite if shapes differ.
    pub fn max_abs_diff(&self, other: &Channel) -> f64 {
        if self.inputs() != other.inputs() || self.outputs() != other.outputs() {
            return f64::INFINITY;
        }
        self.rows
            .iter()
            .flatten()
            .zip(other.rows.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Key for deduplication at 1e-12 resolution.
    fn key(&self) -> Vec<i64> {
        self.rows
            .iter()
            .flatten()
            .map(|v| (v * 1e12).round() as i64)
            .collect()
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| sig10(v)).collect();
            writeln!(f, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// Sender encodes `x` as symbol `encode[x]`; receiver outputs `decode[s]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterministicStrategy {
    pub encode: Vec<usize>,
    pub decode: Vec<usize>,
}

impl DeterministicStrategy {
    /// The composed input-to-output map.
    pub fn map(&self) -> Vec<usize> {
        self.encode.iter().map(|&s| self.decode[s]).collect()
    }

    pub fn channel(&self, n: usize) -> Result<Channel> {
        Channel::deterministic(&self.map(), n)
    }
}

/// Channel obtained by preparing `encodings[x]` and measuring `decoding`.
pub fn gpt_channel(
    sys: &GptSystem,
    encodings: &[State],
    decoding: &Measurement,
) -> Result<Channel> {
    if !decoding.is_complete(&sys.unit().vector, sys.eps()) {
        return Err(NweError::IncompleteMeasurement(decoding.label.clone()));
    }
    if let Some(e) = decoding
        .effects
        .iter()
        .find(|e| !sys.validate_effect(&e.vector))
    {
        return Err(NweError::InvalidParameter(format!(
            "{} is not a valid effect",
            e.label
        )));
    }
    let rows = encodings
        .iter()
        .map(|s| {
            decoding
                .effects
                .iter()
                .map(|e| sys.prob(&e.vector, &s.vector).map(snap))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Channel::new(rows)
}

/// Rounds values within [`ROW_TOL`] of 0 or 1 onto them.
fn snap(v: f64) -> f64 {
    if v.abs() <= ROW_TOL {
        0.0
    } else if (v - 1.0).abs() <= ROW_TOL {
        1.0
    } else {
        v
    }
}

fn check_bound(m: usize, n: usize, d: usize) -> Result<()> {
    if m == 0 || n == 0 || d == 0 {
        return Err(NweError::InvalidParameter(
            "m, n and d must be positive".into(),
        ));
    }
    let estimated = (d as u128)
        .checked_pow(m as u32)
        .and_then(|a| {
            (n as u128)
                .checked_pow(d as u32)
                .and_then(|b| a.checked_mul(b))
        })
        .unwrap_or(u128::MAX);
    if estimated > VERTEX_BOUND {
        return Err(NweError::SearchSpaceTooLarge {
            estimated,
            bound: VERTEX_BOUND,
        });
    }
    Ok(())
}

/// Distinct input-to-output maps realizable with `d` symbols, each with the
/// first strategy (in lexicographic enumeration order) that realizes it.
pub fn classical_strategies(m: usize, n: usize, d: usize) -> Result<Vec<DeterministicStrategy>> {
    check_bound(m, n, d)?;
    let mut seen: BTreeMap<Vec<usize>, DeterministicStrategy> = BTreeMap::new();
    for encode in all_maps(m, d) {
        for decode in all_maps(d, n) {
            let s = DeterministicStrategy {
                encode: encode.clone(),
                decode,
            };
            seen.entry(s.map()).or_insert(s);
        }
    }
    Ok(seen.into_values().collect())
}

/// Vertices of the `d`-symbol classical polytope of `m → n` channels.
pub fn classical_vertices(m: usize, n: usize, d: usize) -> Result<Vec<Channel>> {
    classical_strategies(m, n, d)?
        .iter()
        .map(|s| s.channel(n))
        .collect()
}

/// All maps `[len] → [range]` in lexicographic order.
fn all_maps(len: usize, range: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = range.pow(len as u32);
    (0..total).map(move |mut k| {
        let mut v = vec![0; len];
        for slot in v.iter_mut().rev() {
            *slot = k % range;
            k /= range;
        }
        v
    })
}

/// Convex decomposition over classical vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexCertificate {
    /// `(strategy, weight)` with positive weights.
    pub terms: Vec<(DeterministicStrategy, f64)>,
    /// Largest componentwise recomposition error.
    pub residual: f64,
}

impl ConvexCertificate {
    /// `encode,decode,weight` rows; maps are written as digit strings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("encode,decode,weight\n");
        for (s, w) in &self.terms {
            out.push_str(&format!(
                "{},{},{}\n",
                digits(&s.encode),
                digits(&s.decode),
                sig10(*w)
            ));
        }
        out
    }
}

fn digits(v: &[usize]) -> String {
    v.iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Linear functional separating a channel from the classical polytope.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub weights: Vec<Vec<f64>>,
    /// `max` of `Σ W·V` over classical vertices.
    pub bound: f64,
    /// `Σ W·P` for the rejected channel.
    pub value: f64,
}

impl Witness {
    pub fn violation(&self) -> f64 {
        self.value - self.bound
    }

    /// One row per input, then `bound,<β>` and `value,<W·P>`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.weights {
            let cells: Vec<String> = row.iter().map(|&v| sig10(v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out.push_str(&format!(
            "bound,{}\nvalue,{}\n",
            sig10(self.bound),
            sig10(self.value)
        ));
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Membership {
    Inside(ConvexCertificate),
    Outside(Witness),
}

impl Membership {
    pub fn is_inside(&self) -> bool {
        matches!(self, Membership::Inside(_))
    }
}

/// Decides whether `ch` is simulable with `d` classical symbols.
///
/// Returns [`NweError::NumericalInconclusive`] when neither a recomposing
/// decomposition nor a witness with margin at least [`MARGIN_TOL`] is found.
pub fn in_classical_polytope(ch: &Channel, d: usize) -> Result<Membership> {
    let (m, n) = (ch.inputs(), ch.outputs());
    let strategies = classical_strategies(m, n, d)?;
    let maps: Vec<Vec<usize>> = strategies.iter().map(|s| s.map()).collect();

    // Rows: one per (x, y), then normalization.
    let rows = m * n + 1;
    let mut a = vec![vec![0.0; maps.len()]; rows];
    for (k, map) in maps.iter().enumerate() {
        for (x, &y) in map.iter().enumerate() {
            a[x * n + y][k] = 1.0;
        }
        a[m * n][k] = 1.0;
    }
    let mut b: Vec<f64> = ch.rows.iter().flatten().copied().collect();
    b.push(1.0);

    let res = simplex::phase_one(&a, &b)?;
    if res.objective <= MARGIN_TOL {
        let kept: Vec<f64> = res
            .x
            .iter()
            .map(|&w| if w > ROW_TOL { w } else { 0.0 })
            .collect();
        let total: f64 = kept.iter().sum();
        let terms: Vec<(DeterministicStrategy, f64)> = strategies
            .into_iter()
            .zip(&kept)
            .filter(|(_, &w)| w > 0.0)
            .map(|(s, &w)| (s, w / total))
            .collect();
        let mut recomposed = vec![vec![0.0; n]; m];
        for (s, w) in &terms {
            for (x, y) in s.map().into_iter().enumerate() {
                recomposed[x][y] += w;
            }
        }
        let residual = recomposed
            .iter()
            .flatten()
            .zip(ch.rows.iter().flatten())
            .map(|(r, c)| (r - c).abs())
            .fold(0.0, f64::max);
        if residual > RECOMPOSE_TOL {
            return Err(NweError::NumericalInconclusive(format!(
                "decomposition residual {residual:e} exceeds {RECOMPOSE_TOL:e}"
            )));
        }
        return Ok(Membership::Inside(ConvexCertificate { terms, residual }));
    }

    let scale = res.y[..m * n]
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 {
        return Err(NweError::NumericalInconclusive(
            "degenerate separating functional".into(),
        ));
    }
    let weights: Vec<Vec<f64>> = (0..m)
        .map(|x| (0..n).map(|y| res.y[x * n + y] / scale).collect())
        .collect();
    let bound = maps
        .iter()
        .map(|map| {
            map.iter()
                .enumerate()
                .map(|(x, &y)| weights[x][y])
                .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let witness = Witness {
        value: ch.pair(&weights),
        weights,
        bound,
    };
    if witness.violation() < MARGIN_TOL {
        return Err(NweError::NumericalInconclusive(format!(
            "witness margin {:e} below {MARGIN_TOL:e}",
            witness.violation()
        )));
    }
    Ok(Membership::Outside(witness))
}

/// Exhaustive check of one polygon at fixed `(m, n_out, d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificationReport {
    pub polygon: usize,
    pub inputs: usize,
    pub outputs: usize,
    pub symbols: usize,
    /// Encoding tuples times decoding measurements.
    pub channels_checked: usize,
    pub distinct_channels: usize,
    pub inside: usize,
    /// First channel outside, with its encoding indices and decoding label.
    pub first_outside: Option<(Vec<usize>, String, Witness)>,
    pub max_residual: f64,
}

impl CertificationReport {
    pub fn all_inside(&self) -> bool {
        self.first_outside.is_none()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "bounded certification (finite instance only)\npolygon {}\nm {}\nn {}\nd {}\nchannels {}\ndistinct {}\ninside {}\nmax_residual {:e}\n",
            self.polygon,
            self.inputs,
            self.outputs,
            self.symbols,
            self.channels_checked,
            self.distinct_channels,
            self.inside,
            self.max_residual
        );
        match &self.first_outside {
            None => out.push_str("ALL-IN\n"),
            Some((enc, label, w)) => {
                out.push_str(&format!(
                    "NOT-IN encodings {} decoding {}\n",
                    digits(enc),
                    label
                ));
                out.push_str(&w.to_csv());
            }
        }
        out
    }
}

/// Every channel from `m` vertex encodings of the `n`-gon (with repetition)
/// and each binary extremal decoding, tested against the `d`-symbol polytope.
pub fn certify_polygon(n: usize, m: usize, n_out: usize, d: usize) -> Result<CertificationReport> {
    let sys = GptSystem::polygon(n)?;
    if n_out != 2 {
        return Err(NweError::Unsupported(format!(
            "only binary extremal decodings are cataloged, got {n_out} outputs"
        )));
    }
    check_bound(m, n_out, d)?;
    let tuples = (n as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if tuples * sys.extremal_measurements().len() as u128 > VERTEX_BOUND {
        return Err(NweError::SearchSpaceTooLarge {
            estimated: tuples,
            bound: VERTEX_BOUND,
        });
    }

    let mut report = CertificationReport {
        polygon: n,
        inputs: m,
        outputs: n_out,
        symbols: d,
        channels_checked: 0,
        distinct_channels: 0,
        inside: 0,
        first_outside: None,
        max_residual: 0.0,
    };
    let mut seen = BTreeSet::new();
    for enc in all_maps(m, n) {
        let states: Vec<State> = enc.iter().map(|&i| sys.pure_states()[i].clone()).collect();
        for meas in sys.extremal_measurements() {
            report.channels_checked += 1;
            let ch = gpt_channel(&sys, &states, meas)?;
            if !seen.insert(ch.key()) {
                continue;
            }
            report.distinct_channels += 1;
            match in_classical_polytope(&ch, d)? {
                Membership::Inside(cert) => {
                    report.inside += 1;
                    report.max_residual = report.max_residual.max(cert.residual);
                }
                Membership::Outside(w) => {
                    if report.first_outside.is_none() {
                        report.first_outside = Some((enc.clone(), meas.label.clone(), w));
                    }
                }
            }
        }
    }
    Ok(report)
}
