//! Probability primitives and channel-derived survival probabilities.
//!
//! Bits are corrupted independently with rate `p`. The bytes of the network,
//! transport and data-link headers that are covered by checksums must arrive
//! intact for the payload to be delivered at all (probability `d`); each BNC
//! packet inside a delivered payload is then accepted independently
//! (probability `f`).

use statrs::function::factorial::ln_binomial;

use crate::error::{ModelError, Result};

/// Loss model of a link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LossModel {
    /// Loss rate of an unaggregated frame carrying one BNC packet and no
    /// integrity field, converted to a bit error rate before use.
    BaselinePlr(f64),
    /// Independent per-bit error rate.
    Ber(f64),
}

impl LossModel {
    fn value(self) -> f64 {
        match self {
            LossModel::BaselinePlr(x) | LossModel::Ber(x) => x,
        }
    }
}

/// Byte layout of a frame outside the BNC packets, plus the link loss model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// `L`: maximum size of a network layer packet.
    pub max_payload: usize,
    /// `P`: network plus transport header bytes (checksummed).
    pub proto_header: usize,
    /// `P_DL`: data-link bytes that must be received correctly.
    pub dl_header: usize,
    /// `Q`: data-link bytes that may be corrupted (e.g. the FCS).
    pub dl_trailer: usize,
    pub loss: LossModel,
}

impl ChannelParams {
    /// Jumbo Ethernet, UDP-Lite over IPv4 without header compression.
    pub fn jumbo_udplite_ipv4(loss: LossModel) -> Self {
        ChannelParams {
            max_payload: 9000,
            proto_header: 28,
            dl_header: 22,
            dl_trailer: 4,
            loss,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let x = self.loss.value();
        if !(0.0..1.0).contains(&x) {
            return Err(ModelError::Domain(format!(
                "loss rate {x} must lie in [0, 1)"
            )));
        }
        Ok(())
    }

    /// Bytes per frame that do not belong to BNC packets.
    pub fn overhead(&self) -> usize {
        self.proto_header + self.dl_header + self.dl_trailer
    }

    /// Bit error rate implied by the loss model for the given code.
    pub fn ber(&self, code: &CodeParams) -> Result<f64> {
        match self.loss {
            LossModel::Ber(p) => {
                self.validate()?;
                Ok(p)
            }
            LossModel::BaselinePlr(plr) => ber_from_plr(plr, self, code),
        }
    }
}

/// Integrity protection applied to each BNC packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntegrityMode {
    /// Drop the BNC packet on any detected error.
    Checksum,
    /// Byte-symbol code over GF(256) correcting up to `floor(F/2)` errors.
    Fec,
}

impl IntegrityMode {
    pub fn as_str(self) -> &'static str {
        match self {
            IntegrityMode::Checksum => "checksum",
            IntegrityMode::Fec => "fec",
        }
    }
}

impl std::str::FromStr for IntegrityMode {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "checksum" => Ok(IntegrityMode::Checksum),
            "fec" => Ok(IntegrityMode::Fec),
            other => Err(ModelError::InvalidParams(format!(
                "unknown integrity mode '{other}' (expected checksum or fec)"
            ))),
        }
    }
}

/// BNC code parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodeParams {
    /// `M`: coded packets per batch.
    pub batch_size: usize,
    /// `K`: payload bytes per BNC packet.
    pub payload: usize,
    /// `H`: BNC header bytes (batch ID and coefficient vector).
    pub bnc_header: usize,
    /// `F`: integrity bytes per BNC packet.
    pub integrity_bytes: usize,
    pub integrity: IntegrityMode,
}

impl CodeParams {
    pub fn new(
        batch_size: usize,
        payload: usize,
        bnc_header: usize,
        integrity_bytes: usize,
        integrity: IntegrityMode,
    ) -> Result<Self> {
        let code = CodeParams {
            batch_size,
            payload,
            bnc_header,
            integrity_bytes,
            integrity,
        };
        code.validate()?;
        Ok(code)
    }

    /// Minimal BNC protocol over GF(256): a 2-byte batch ID plus an
    /// `M`-byte coefficient vector.
    pub fn minimal(
        batch_size: usize,
        payload: usize,
        integrity_bytes: usize,
        integrity: IntegrityMode,
    ) -> Result<Self> {
        Self::new(
            batch_size,
            payload,
            batch_size + 2,
            integrity_bytes,
            integrity,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(ModelError::InvalidParams(
                "batch size M must be >= 1".into(),
            ));
        }
        if self.payload == 0 {
            return Err(ModelError::InvalidParams("payload K must be >= 1".into()));
        }
        if self.integrity == IntegrityMode::Fec && self.integrity_bytes == 0 {
            return Err(ModelError::InvalidParams(
                "FEC integrity requires F >= 1".into(),
            ));
        }
        Ok(())
    }

    /// `H + K + F`.
    pub fn packet_len(&self) -> usize {
        self.bnc_header + self.payload + self.integrity_bytes
    }
}

/// Probability mass over batch ranks `1..=M`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankDistribution {
    mass: Vec<f64>,
}

impl RankDistribution {
    const TOLERANCE: f64 = 1e-12;

    /// `mass[r - 1]` is the probability of rank `r`.
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        if mass.is_empty() {
            return Err(ModelError::InvalidParams(
                "rank distribution needs at least one rank".into(),
            ));
        }
        if let Some(bad) = mass.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(ModelError::Domain(format!(
                "rank mass {bad} is not a probability"
            )));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > Self::TOLERANCE {
            return Err(ModelError::Domain(format!(
                "rank masses sum to {total}, not 1"
            )));
        }
        Ok(RankDistribution { mass })
    }

    /// Normalizes arbitrary nonnegative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if total.is_nan() || total <= 0.0 || weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(ModelError::Domain(
                "rank weights must be nonnegative with a positive sum".into(),
            ));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    /// All batches have rank `batch_size`.
    pub fn degenerate(batch_size: usize) -> Self {
        let mut mass = vec![0.0; batch_size];
        mass[batch_size - 1] = 1.0;
        RankDistribution { mass }
    }

    /// `bin(r; M, rho)` conditioned on `r >= 1`.
    pub fn truncated_binomial(batch_size: usize, rho: f64) -> Result<Self> {
        let weights = (1..=batch_size)
            .map(|r| binom_pmf(r, batch_size, rho))
            .collect::<Result<Vec<_>>>()?;
        Self::from_weights(&weights)
    }

    pub fn uniform(batch_size: usize) -> Self {
        RankDistribution {
            mass: vec![1.0 / batch_size as f64; batch_size],
        }
    }

    pub fn batch_size(&self) -> usize {
        self.mass.len()
    }

    /// Probability of rank `r`; zero outside `1..=M`.
    pub fn mass(&self, r: usize) -> f64 {
        if r == 0 {
            0.0
        } else {
            self.mass.get(r - 1).copied().unwrap_or(0.0)
        }
    }

    /// Iterates `(r, mass)` for `r = 1..=M`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.mass.iter().enumerate().map(|(i, m)| (i + 1, *m))
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(r, m)| r as f64 * m).sum()
    }
}

fn check_probability(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(ModelError::Domain(format!("{name} = {x} is not in [0, 1]")))
    }
}

/// `C(n, k) x^k (1 - x)^(n - k)`, evaluated in log space.
pub fn binom_pmf(k: usize, n: usize, x: f64) -> Result<f64> {
    if k > n {
        return Err(ModelError::Domain(format!("k = {k} exceeds n = {n}")));
    }
    check_probability("x", x)?;
    Ok(binom_unchecked(k, n, x))
}

pub(crate) fn binom_unchecked(k: usize, n: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if x == 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    let ln = ln_binomial(n as u64, k as u64) + k as f64 * x.ln() + (n - k) as f64 * (-x).ln_1p();
    ln.exp()
}

/// Full row `bin(0..=n; n, x)`.
pub(crate) fn binom_row(n: usize, x: f64) -> Vec<f64> {
    (0..=n).map(|k| binom_unchecked(k, n, x)).collect()
}

/// Probability of receiving `k` of `n` BNC packets of one batch carried by a
/// single UDP-Lite packet: the header survives with probability `d`, then
/// each packet with probability `f`.
pub fn bin_d_pmf(k: usize, n: usize, f: f64, d: f64) -> Result<f64> {
    if k > n {
        return Err(ModelError::Domain(format!("k = {k} exceeds n = {n}")));
    }
    check_probability("f", f)?;
    check_probability("d", d)?;
    Ok(bin_d_unchecked(k, n, f, d))
}

pub(crate) fn bin_d_unchecked(k: usize, n: usize, f: f64, d: f64) -> f64 {
    if k == 0 {
        (1.0 - d) + d * binom_unchecked(0, n, f)
    } else {
        d * binom_unchecked(k, n, f)
    }
}

pub(crate) fn bin_d_row(n: usize, f: f64, d: f64) -> Vec<f64> {
    (0..=n).map(|k| bin_d_unchecked(k, n, f, d)).collect()
}

fn baseline_bits(ch: &ChannelParams, code: &CodeParams) -> f64 {
    8.0 * (ch.overhead() + code.bnc_header + code.payload) as f64
}

/// Bit error rate from the baseline packet loss rate. The baseline frame
/// carries one BNC packet without integrity bytes, so `F` is excluded.
pub fn ber_from_plr(plr: f64, ch: &ChannelParams, code: &CodeParams) -> Result<f64> {
    if !(0.0..1.0).contains(&plr) {
        return Err(ModelError::Domain(format!("PLR {plr} must lie in [0, 1)")));
    }
    Ok(-(((1.0 - plr).ln() / baseline_bits(ch, code)).exp_m1()))
}

/// Inverse of [`ber_from_plr`].
pub fn plr_from_ber(p: f64, ch: &ChannelParams, code: &CodeParams) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return Err(ModelError::Domain(format!("BER {p} must lie in [0, 1)")));
    }
    Ok(-((baseline_bits(ch, code) * (-p).ln_1p()).exp_m1()))
}

/// `(1 - p)^n_bits`, accurate for tiny `p`.
fn survive_bits(p: f64, n_bits: usize) -> f64 {
    (n_bits as f64 * (-p).ln_1p()).exp()
}

/// `d`: probability that the uncorruptible header bytes `P + P_DL` arrive intact.
pub fn header_survival(p: f64, ch: &ChannelParams) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return Err(ModelError::Domain(format!("BER {p} must lie in [0, 1)")));
    }
    Ok(survive_bits(p, 8 * (ch.proto_header + ch.dl_header)))
}

/// `f`: probability that one BNC packet in a delivered payload is accepted.
pub fn packet_survival(p: f64, code: &CodeParams) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return Err(ModelError::Domain(format!("BER {p} must lie in [0, 1)")));
    }
    let len = code.packet_len();
    Ok(match code.integrity {
        IntegrityMode::Checksum => survive_bits(p, 8 * len),
        IntegrityMode::Fec => {
            let byte_error = -(8.0 * (-p).ln_1p()).exp_m1();
            (0..=code.integrity_bytes / 2)
                .map(|e| binom_unchecked(e, len, byte_error))
                .sum()
        }
    })
}
