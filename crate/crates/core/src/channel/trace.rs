//! Materialized channel traces and their text file format.
//!
//! A trace file starts with one header line
//!
//! ```text
//! SOUNDTRACE v1 num_t=<T> num_users=<U> num_sc=<S> num_tx=<A> dt_s=<float>
//! ```
//!
//! followed by `T*U*S*A` rows `t_index,user,subcarrier,tx_antenna,re,im` in
//! lexicographic index order. Floats use shortest round-trip decimal form.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::time::Duration;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{ChannelError, ChannelModel, ChannelSource, DopplerSchedule, FadingField};

const MAGIC: &str = "SOUNDTRACE";
const VERSION: &str = "v1";

/// Time-major complex frequency responses `H[t][user][subcarrier][tx]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingTrace {
    num_tx: usize,
    num_users: usize,
    num_subcarriers: usize,
    dt_s: f64,
    samples: Vec<Complex64>,
}

impl FadingTrace {
    pub fn from_samples(
        num_users: usize,
        num_subcarriers: usize,
        num_tx: usize,
        dt_s: f64,
        samples: Vec<Complex64>,
    ) -> Result<Self, ChannelError> {
        if num_users == 0 || num_subcarriers == 0 || num_tx == 0 {
            return Err(ChannelError::InvalidConfig("trace dimensions must be at least 1".into()));
        }
        if !(dt_s > 0.0) || !dt_s.is_finite() {
            return Err(ChannelError::InvalidConfig(format!("trace step must be positive, got {dt_s}")));
        }
        let per_t = num_users * num_subcarriers * num_tx;
        if samples.is_empty() || !samples.len().is_multiple_of(per_t) {
            return Err(ChannelError::DimensionMismatch(format!(
                "{} samples is not a positive multiple of {per_t}",
                samples.len()
            )));
        }
        if let Some(i) = samples.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(ChannelError::NonFinite { index: i });
        }
        Ok(Self { num_tx, num_users, num_subcarriers, dt_s, samples })
    }

    pub fn num_t(&self) -> usize {
        self.samples.len() / (self.num_users * self.num_subcarriers * self.num_tx)
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_subcarriers(&self) -> usize {
        self.num_subcarriers
    }

    pub fn num_tx(&self) -> usize {
        self.num_tx
    }

    pub fn dt_s(&self) -> f64 {
        self.dt_s
    }

    /// (num_t, num_users, num_subcarriers, num_tx)
    pub fn shape(&self) -> (usize, usize, usize, usize) {
        (self.num_t(), self.num_users, self.num_subcarriers, self.num_tx)
    }

    fn offset(&self, t: usize, user: usize, sc: usize, tx: usize) -> usize {
        ((t * self.num_users + user) * self.num_subcarriers + sc) * self.num_tx + tx
    }

    pub fn get(&self, t: usize, user: usize, sc: usize, tx: usize) -> Complex64 {
        self.samples[self.offset(t, user, sc, tx)]
    }

    /// All samples of one time index.
    pub fn slice_at(&self, t: usize) -> &[Complex64] {
        let per_t = self.num_users * self.num_subcarriers * self.num_tx;
        &self.samples[t * per_t..(t + 1) * per_t]
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// Per-subcarrier `N_u x N_t` matrices for the listed users at time `t`.
    pub fn response_at(&self, t: usize, users: &[usize]) -> Result<Vec<DMatrix<Complex64>>, ChannelError> {
        if t >= self.num_t() {
            return Err(ChannelError::TraceExhausted { requested: t as u64, available: self.num_t() as u64 });
        }
        if let Some(&u) = users.iter().find(|&&u| u >= self.num_users) {
            return Err(ChannelError::UnknownUser(u));
        }
        Ok((0..self.num_subcarriers)
            .map(|sc| DMatrix::from_fn(users.len(), self.num_tx, |r, a| self.get(t, users[r], sc, a)))
            .collect())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ChannelError> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<(), ChannelError> {
        writeln!(
            w,
            "{MAGIC} {VERSION} num_t={} num_users={} num_sc={} num_tx={} dt_s={}",
            self.num_t(),
            self.num_users,
            self.num_subcarriers,
            self.num_tx,
            self.dt_s
        )?;
        let mut i = 0;
        for t in 0..self.num_t() {
            for u in 0..self.num_users {
                for s in 0..self.num_subcarriers {
                    for a in 0..self.num_tx {
                        let c = self.samples[i];
                        writeln!(w, "{t},{u},{s},{a},{},{}", c.re, c.im)?;
                        i += 1;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ChannelError> {
        Self::read_from(BufReader::new(File::open(path)?))
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<Self, ChannelError> {
        let mut lines = reader.lines();
        let header = lines.next().transpose()?.ok_or_else(|| ChannelError::MalformedHeader("empty file".into()))?;
        let dims = parse_header(&header)?;
        let expected = dims.num_t * dims.num_users * dims.num_sc * dims.num_tx;
        let mut samples = Vec::with_capacity(expected);
        let mut want = [0usize; 4];
        let limits = [dims.num_t, dims.num_users, dims.num_sc, dims.num_tx];
        for (k, line) in lines.enumerate() {
            let line = line?;
            let line_no = k + 2;
            if line.trim().is_empty() {
                continue;
            }
            if samples.len() == expected {
                return Err(ChannelError::DimensionMismatch(format!(
                    "header declares {expected} records but line {line_no} holds another"
                )));
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 6 {
                return Err(ChannelError::MalformedRow { line: line_no, reason: format!("expected 6 fields, found {}", fields.len()) });
            }
            let mut idx = [0usize; 4];
            for (j, f) in fields[..4].iter().enumerate() {
                idx[j] = f.parse().map_err(|_| ChannelError::MalformedRow {
                    line: line_no,
                    reason: format!("bad index `{f}`"),
                })?;
            }
            if idx.iter().zip(&limits).any(|(i, l)| i >= l) {
                return Err(ChannelError::DimensionMismatch(format!(
                    "line {line_no}: index {idx:?} outside header dimensions {limits:?}"
                )));
            }
            if idx != want {
                return Err(ChannelError::MalformedRow {
                    line: line_no,
                    reason: format!("expected index {want:?}, found {idx:?}"),
                });
            }
            let parse = |f: &str| -> Result<f64, ChannelError> {
                f.parse::<f64>().map_err(|_| ChannelError::MalformedRow { line: line_no, reason: format!("bad float `{f}`") })
            };
            let (re, im) = (parse(fields[4])?, parse(fields[5])?);
            if !re.is_finite() || !im.is_finite() {
                return Err(ChannelError::NonFinite { index: samples.len() });
            }
            samples.push(Complex64::new(re, im));
            // odometer increment over (t, user, sc, tx)
            for j in (0..4).rev() {
                want[j] += 1;
                if want[j] < limits[j] {
                    break;
                }
                want[j] = 0;
            }
        }
        if samples.len() < expected {
            return Err(ChannelError::Truncated { expected, found: samples.len() });
        }
        Self::from_samples(dims.num_users, dims.num_sc, dims.num_tx, dims.dt_s, samples)
    }
}

struct HeaderDims {
    num_t: usize,
    num_users: usize,
    num_sc: usize,
    num_tx: usize,
    dt_s: f64,
}

fn parse_header(line: &str) -> Result<HeaderDims, ChannelError> {
    let bad = |why: &str| ChannelError::MalformedHeader(format!("{why}: `{line}`"));
    let mut parts = line.split_whitespace();
    if parts.next() != Some(MAGIC) {
        return Err(bad("missing SOUNDTRACE tag"));
    }
    if parts.next() != Some(VERSION) {
        return Err(bad("unsupported version"));
    }
    let mut kv = std::collections::HashMap::new();
    for p in parts {
        let (k, v) = p.split_once('=').ok_or_else(|| bad("expected key=value"))?;
        kv.insert(k, v);
    }
    let count = |k: &str| -> Result<usize, ChannelError> {
        let v = kv.get(k).ok_or_else(|| bad(&format!("missing {k}")))?;
        let n: usize = v.parse().map_err(|_| bad(&format!("bad {k}")))?;
        if n == 0 {
            return Err(bad(&format!("{k} must be positive")));
        }
        Ok(n)
    };
    let dt_s: f64 = kv
        .get("dt_s")
        .ok_or_else(|| bad("missing dt_s"))?
        .parse()
        .map_err(|_| bad("bad dt_s"))?;
    if !(dt_s > 0.0) || !dt_s.is_finite() {
        return Err(bad("dt_s must be positive"));
    }
    if kv.len() != 5 {
        return Err(bad("unexpected header keys"));
    }
    Ok(HeaderDims {
        num_t: count("num_t")?,
        num_users: count("num_users")?,
        num_sc: count("num_sc")?,
        num_tx: count("num_tx")?,
        dt_s,
    })
}

/// Samples `num_users` independent users every `model.dt` for `duration`,
/// giving `floor(duration / dt) + 1` time slices.
pub fn generate_trace(
    model: &ChannelModel,
    num_users: usize,
    duration: Duration,
    schedule: &DopplerSchedule,
    seed: u64,
) -> Result<FadingTrace, ChannelError> {
    model.validate()?;
    if num_users == 0 {
        return Err(ChannelError::InvalidConfig("at least one user is required".into()));
    }
    if duration < model.dt {
        return Err(ChannelError::InvalidConfig("duration shorter than one update step".into()));
    }
    let num_t = (duration.as_nanos() / model.dt.as_nanos()) as u64 + 1;
    let users: Vec<usize> = (0..num_users).collect();
    let mut field = FadingField::new(model.clone(), schedule.clone(), &users, seed)?;
    let n_sc = model.num_subcarriers();
    let mut samples = Vec::with_capacity(num_users * n_sc * model.num_tx * num_t as usize);
    for t in 0..num_t {
        field.advance_to(t)?;
        for u in 0..num_users {
            for sc in 0..n_sc {
                for a in 0..model.num_tx {
                    samples.push(field.respond(u, sc, a));
                }
            }
        }
    }
    FadingTrace::from_samples(num_users, n_sc, model.num_tx, model.dt.as_secs_f64(), samples)
}

/// Replays a trace as a channel source, one trace slice per block.
#[derive(Debug, Clone)]
pub struct TraceReplay {
    trace: FadingTrace,
    dt: Duration,
}

impl TraceReplay {
    pub fn new(trace: FadingTrace) -> Self {
        let dt = Duration::from_secs_f64(trace.dt_s());
        Self { trace, dt }
    }

    pub fn trace(&self) -> &FadingTrace {
        &self.trace
    }
}

impl ChannelSource for TraceReplay {
    fn num_tx(&self) -> usize {
        self.trace.num_tx()
    }

    fn num_subcarriers(&self) -> usize {
        self.trace.num_subcarriers()
    }

    fn dt(&self) -> Duration {
        self.dt
    }

    fn response(&mut self, block: u64, users: &[usize]) -> Result<Vec<DMatrix<Complex64>>, ChannelError> {
        self.trace.response_at(block as usize, users)
    }
}
