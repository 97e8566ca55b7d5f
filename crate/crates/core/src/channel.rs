//! Synthetic propagation environment, the radar antenna pattern, small-scale
//! fading and assembly of the large-scale CSI used by the allocators.
//!
//! The propagation field is a deterministic log-distance model with thin
//! obstruction screens (buildings) that add a fixed loss to every link they
//! cut, plus optional hashed log-normal shadowing. It stands in for a
//! ray-traced environment: queries are pure and reciprocal.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{db_to_linear, Position, Topology};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Distances below this are clamped when evaluating the log-distance law.
const NEAR_FIELD_M: f64 = 1.0;

/// A thin obstruction between two endpoints adding `extra_loss_db` to every
/// link that crosses it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Screen {
    pub a: Position,
    pub b: Position,
    pub extra_loss_db: f64,
}

impl Screen {
    pub fn new(a: Position, b: Position, extra_loss_db: f64) -> Self {
        Self { a, b, extra_loss_db }
    }

    /// Whether the closed segment `p`-`q` touches this screen.
    pub fn blocks(&self, p: &Position, q: &Position) -> bool {
        segments_intersect(p, q, &self.a, &self.b)
    }
}

fn orient(a: &Position, b: &Position, c: &Position) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn on_segment(a: &Position, b: &Position, p: &Position) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

pub fn segments_intersect(p1: &Position, p2: &Position, q1: &Position, q2: &Position) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

/// Deterministic ground-truth propagation environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationField {
    /// Loss at 1 m in dB.
    pub reference_loss_db: f64,
    pub pathloss_exponent: f64,
    #[serde(default)]
    pub screens: Vec<Screen>,
    #[serde(default)]
    pub shadowing_sigma_db: f64,
    #[serde(default)]
    pub shadowing_seed: u64,
    /// Carrier used for the free-space radar-target links.
    pub carrier_hz: f64,
    /// Scattering gain of the target in dB (0 dB: lossless reflection).
    #[serde(default)]
    pub target_gain_db: f64,
}

impl PropagationField {
    /// Free-space style field with the 1 m reference loss of `carrier_hz`.
    pub fn log_distance(carrier_hz: f64, exponent: f64) -> Self {
        Self {
            reference_loss_db: free_space_loss_db(carrier_hz, 1.0),
            pathloss_exponent: exponent,
            screens: Vec::new(),
            shadowing_sigma_db: 0.0,
            shadowing_seed: 0,
            carrier_hz,
            target_gain_db: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1.5..=6.0).contains(&self.pathloss_exponent) {
            return Err(Error::InvalidConfig {
                key: "field.pathloss_exponent".into(),
                reason: "must lie in [1.5, 6]".into(),
            });
        }
        if self.screens.iter().any(|s| !(s.extra_loss_db >= 0.0)) {
            return Err(Error::InvalidConfig {
                key: "field.screens".into(),
                reason: "screen losses must be non-negative".into(),
            });
        }
        if !(self.carrier_hz > 0.0) {
            return Err(Error::InvalidConfig {
                key: "field.carrier_ghz".into(),
                reason: "carrier must be positive".into(),
            });
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    /// Summed loss of the screens cut by the segment `p`-`q`.
    pub fn screen_loss_db(&self, p: &Position, q: &Position) -> f64 {
        self.screens.iter().filter(|s| s.blocks(p, q)).map(|s| s.extra_loss_db).sum()
    }

    /// Deterministic, reciprocal loss in dB between `tx` and `rx`.
    pub fn pathloss_db(&self, tx: &Position, rx: &Position) -> Result<f64> {
        let d = tx.distance(rx);
        if d < 1e-9 {
            return Err(Error::Geometry(format!(
                "transmitter and receiver coincide at ({}, {})",
                tx.x, tx.y
            )));
        }
        let mut loss =
            self.reference_loss_db + 10.0 * self.pathloss_exponent * d.max(NEAR_FIELD_M).log10();
        loss += self.screen_loss_db(tx, rx);
        if self.shadowing_sigma_db > 0.0 {
            loss += self.shadowing_sigma_db * hashed_normal(tx, rx, self.shadowing_seed);
        }
        Ok(loss)
    }

    /// Two-way power gain radar `from` -> target -> radar `to`: free space on
    /// both hops plus the loss of every screen each hop cuts, with the given
    /// antenna gains (linear) at each end.
    pub fn bistatic_gain(
        &self,
        from: &Position,
        target: &Position,
        to: &Position,
        tx_gain: f64,
        rx_gain: f64,
    ) -> Result<f64> {
        let d1 = from.distance(target);
        let d2 = target.distance(to);
        if d1 < 1e-9 || d2 < 1e-9 {
            return Err(Error::Geometry("target coincides with a radar".into()));
        }
        let lambda = self.wavelength();
        let hop = |d: f64| (lambda / (4.0 * PI * d)).powi(2);
        let screens_db = self.screen_loss_db(from, target) + self.screen_loss_db(target, to);
        Ok(tx_gain * rx_gain * hop(d1) * hop(d2) * db_to_linear(self.target_gain_db - screens_db))
    }
}

/// Free-space loss (Friis) in dB at distance `d` metres.
pub fn free_space_loss_db(carrier_hz: f64, d: f64) -> f64 {
    20.0 * (4.0 * PI * d * carrier_hz / SPEED_OF_LIGHT).log10()
}

/// Ground-truth path loss in dB (see [`PropagationField::pathloss_db`]).
pub fn ground_truth_pathloss(field: &PropagationField, tx: &Position, rx: &Position) -> Result<f64> {
    field.pathloss_db(tx, rx)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn quantize(p: &Position) -> (i64, i64) {
    ((p.x * 1000.0).round() as i64, (p.y * 1000.0).round() as i64)
}

/// Standard normal deviate keyed on the unordered endpoint pair.
fn hashed_normal(a: &Position, b: &Position, seed: u64) -> f64 {
    let (qa, qb) = (quantize(a), quantize(b));
    let (lo, hi) = if qa <= qb { (qa, qb) } else { (qb, qa) };
    let mut h = splitmix64(seed);
    for v in [lo.0, lo.1, hi.0, hi.1] {
        h = splitmix64(h ^ v as u64);
    }
    let h2 = splitmix64(h);
    let u1 = ((h >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
    let u2 = ((h2 >> 11) as f64) / (1u64 << 53) as f64;
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Parametric radar antenna: Gaussian main lobe on a constant side-lobe floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AntennaPattern {
    pub peak_gain_dbi: f64,
    pub theta_3db_deg: f64,
    #[serde(default = "default_sidelobe")]
    pub sidelobe_dbi: f64,
    /// Boresight bearing in radians. Overwritten by [`build_csi`], which aims
    /// every radar at the target.
    #[serde(default)]
    pub boresight_rad: f64,
}

fn default_sidelobe() -> f64 {
    -10.0
}

impl AntennaPattern {
    pub fn new(peak_gain_dbi: f64, theta_3db_deg: f64) -> Self {
        Self { peak_gain_dbi, theta_3db_deg, sidelobe_dbi: default_sidelobe(), boresight_rad: 0.0 }
    }

    pub fn aimed(&self, from: &Position, at: &Position) -> Self {
        Self { boresight_rad: from.bearing_to(at), ..self.clone() }
    }

    /// Gain in dBi toward `to` from an antenna located at `from`.
    pub fn gain_toward_dbi(&self, from: &Position, to: &Position) -> f64 {
        let mut off = (from.bearing_to(to) - self.boresight_rad).to_degrees().abs() % 360.0;
        if off > 180.0 {
            off = 360.0 - off;
        }
        radar_antenna_gain(self, off)
    }
}

/// Gain in dBi at `offset_deg` off boresight.
pub fn radar_antenna_gain(pattern: &AntennaPattern, offset_deg: f64) -> f64 {
    let off = offset_deg.abs().min(180.0);
    let main = pattern.peak_gain_dbi - 3.0 * (2.0 * off / pattern.theta_3db_deg).powi(2);
    main.max(pattern.sidelobe_dbi)
}

/// Large-scale CSI of every link in the network, in linear power units.
#[derive(Debug, Clone, PartialEq)]
pub struct LargeScaleCsi {
    /// BS j -> user, length M_c.
    pub l_c: Vec<f64>,
    /// BS j -> radar i, indexed `[j][i]`.
    pub l_c_to_r: Vec<Vec<f64>>,
    /// Radar i -> user, length M_r.
    pub l_r_to_c: Vec<f64>,
    /// Two-way radar i -> target -> radar i amplitudes.
    pub h_rr: Vec<Complex64>,
    /// |h_{r_j -> r_i}|² (radar j -> target -> radar i), indexed `[j][i]`.
    /// The diagonal equals |h_rr|².
    pub radar_cross: Vec<Vec<f64>>,
}

impl LargeScaleCsi {
    pub fn m_c(&self) -> usize {
        self.l_c.len()
    }

    pub fn m_r(&self) -> usize {
        self.l_r_to_c.len()
    }

    /// |h_{r_i -> r_i}|².
    pub fn radar_gain(&self, i: usize) -> f64 {
        self.h_rr[i].norm_sqr()
    }

    /// Column of BS -> radar `i` gains.
    pub fn bs_to_radar(&self, i: usize) -> Vec<f64> {
        self.l_c_to_r.iter().map(|row| row[i]).collect()
    }

    /// CSI built directly from gains, with no cross-radar coupling.
    pub fn from_gains(
        l_c: Vec<f64>,
        l_c_to_r: Vec<Vec<f64>>,
        l_r_to_c: Vec<f64>,
        radar_gains: Vec<f64>,
    ) -> Self {
        let m_r = radar_gains.len();
        let radar_cross = (0..m_r)
            .map(|j| (0..m_r).map(|i| if i == j { radar_gains[i] } else { 0.0 }).collect())
            .collect();
        Self {
            l_c,
            l_c_to_r,
            l_r_to_c,
            h_rr: radar_gains.iter().map(|g| Complex64::new(g.sqrt(), 0.0)).collect(),
            radar_cross,
        }
    }

    pub fn all_finite_positive(&self) -> bool {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        self.l_c.iter().all(|&v| ok(v))
            && self.l_c_to_r.iter().flatten().all(|&v| ok(v))
            && self.l_r_to_c.iter().all(|&v| ok(v))
            && self.h_rr.iter().all(|h| ok(h.norm_sqr()))
    }
}

/// Anything able to report a path loss for a (transmitter, receiver) pair:
/// the ground-truth field or one of the radio-map estimators.
pub trait PathLossSource {
    fn pathloss_db(&self, tx_id: &str, tx: &Position, rx: &Position) -> Result<f64>;
}

impl PathLossSource for PropagationField {
    fn pathloss_db(&self, _tx_id: &str, tx: &Position, rx: &Position) -> Result<f64> {
        PropagationField::pathloss_db(self, tx, rx)
    }
}

/// Builds the large-scale CSI from the ground-truth field.
pub fn build_csi(
    field: &PropagationField,
    topo: &Topology,
    pattern: &AntennaPattern,
) -> Result<LargeScaleCsi> {
    build_csi_from(field, field, topo, pattern)
}

/// Builds the large-scale CSI with path losses taken from `source`.
///
/// Radars aim at the target; the radar gain toward the relevant BS or user is
/// added on top of the path loss of every radar link. The radar-target links
/// are evaluated with `field` (free space plus screen losses), never with
/// the estimator.
pub fn build_csi_from(
    source: &dyn PathLossSource,
    field: &PropagationField,
    topo: &Topology,
    pattern: &AntennaPattern,
) -> Result<LargeScaleCsi> {
    let target = topo.target_position;
    let patterns: Vec<AntennaPattern> =
        topo.radar_positions.iter().map(|r| pattern.aimed(r, &target)).collect();

    let mut l_c = Vec::with_capacity(topo.num_bs());
    let mut l_c_to_r = Vec::with_capacity(topo.num_bs());
    for (j, bs) in topo.bs_positions.iter().enumerate() {
        let id = Topology::bs_id(j);
        l_c.push(db_to_linear(-source.pathloss_db(&id, bs, &topo.user_position)?));
        let row = topo
            .radar_positions
            .iter()
            .zip(&patterns)
            .map(|(radar, pat)| {
                let pl = source.pathloss_db(&id, bs, radar)?;
                Ok(db_to_linear(pat.gain_toward_dbi(radar, bs) - pl))
            })
            .collect::<Result<Vec<f64>>>()?;
        l_c_to_r.push(row);
    }

    let mut l_r_to_c = Vec::with_capacity(topo.num_radars());
    let mut h_rr = Vec::with_capacity(topo.num_radars());
    let lambda = field.wavelength();
    for (i, (radar, pat)) in topo.radar_positions.iter().zip(&patterns).enumerate() {
        let id = Topology::radar_id(i);
        let pl = source.pathloss_db(&id, radar, &topo.user_position)?;
        l_r_to_c.push(db_to_linear(pat.gain_toward_dbi(radar, &topo.user_position) - pl));
        let peak = db_to_linear(pattern.peak_gain_dbi);
        let gain = field.bistatic_gain(radar, &target, radar, peak, peak)?;
        let phase = -2.0 * PI * 2.0 * radar.distance(&target) / lambda;
        h_rr.push(Complex64::from_polar(gain.sqrt(), phase));
    }

    let m_r = topo.num_radars();
    let mut radar_cross = vec![vec![0.0; m_r]; m_r];
    for j in 0..m_r {
        for i in 0..m_r {
            let (rj, ri) = (&topo.radar_positions[j], &topo.radar_positions[i]);
            let gj = db_to_linear(patterns[j].gain_toward_dbi(rj, &target));
            let gi = db_to_linear(patterns[i].gain_toward_dbi(ri, &target));
            radar_cross[j][i] = field.bistatic_gain(rj, &target, ri, gj, gi)?;
        }
    }

    Ok(LargeScaleCsi { l_c, l_c_to_r, l_r_to_c, h_rr, radar_cross })
}

/// One realisation of the BS -> user small-scale fading S_c (M_c x N_c).
#[derive(Debug, Clone, PartialEq)]
pub struct SmallScaleDraw {
    pub rows: usize,
    pub cols: usize,
    /// Row-major entries.
    pub s_c: Vec<Complex64>,
}

impl SmallScaleDraw {
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.s_c[r * self.cols + c]
    }
}

/// Draws i.i.d. CN(0, 1) entries.
pub fn sample_small_scale<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> SmallScaleDraw {
    let mut s_c = Vec::with_capacity(rows * cols);
    fill_cn01(rng, rows * cols, &mut s_c);
    SmallScaleDraw { rows, cols, s_c }
}

pub(crate) fn fill_cn01<R: Rng + ?Sized>(rng: &mut R, n: usize, out: &mut Vec<Complex64>) {
    out.clear();
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    for _ in 0..n {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        out.push(Complex64::new(re * scale, im * scale));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn plain_field(reference: f64, exponent: f64) -> PropagationField {
        PropagationField { reference_loss_db: reference, ..PropagationField::log_distance(2.8e9, exponent) }
    }

    #[test]
    fn pathloss_plug_in() {
        let f = plain_field(40.0, 2.0);
        let l = f.pathloss_db(&Position::new(0.0, 0.0), &Position::new(10.0, 0.0)).unwrap();
        assert!((l - 60.0).abs() < 1e-12);
    }

    #[test]
    fn pathloss_screen_adds_loss() {
        let mut f = plain_field(40.0, 2.0);
        f.screens.push(Screen::new(Position::new(5.0, -3.0), Position::new(5.0, 3.0), 20.0));
        let (a, b) = (Position::new(0.0, 0.0), Position::new(10.0, 0.0));
        assert!(segments_intersect(&a, &b, &f.screens[0].a, &f.screens[0].b));
        assert!((f.pathloss_db(&a, &b).unwrap() - 80.0).abs() < 1e-12);
        // A path passing beside the screen is unaffected.
        let c = Position::new(10.0, 10.0);
        let d = Position::new(0.0, 10.0);
        assert!((f.pathloss_db(&d, &c).unwrap() - 60.0).abs() < 1e-12);
    }

    #[test]
    fn coincident_endpoints_rejected() {
        let f = plain_field(40.0, 2.0);
        let p = Position::new(1.0, 1.0);
        assert!(matches!(f.pathloss_db(&p, &p), Err(Error::Geometry(_))));
    }

    #[test]
    fn antenna_examples() {
        let pat = AntennaPattern::new(30.0, 32.0);
        assert_eq!(radar_antenna_gain(&pat, 0.0), 30.0);
        assert!((radar_antenna_gain(&pat, 16.0) - 27.0).abs() < 1e-12);
        // Main lobe at 90° would be 30 - 3 * (180/32)² ≈ -64.9 dBi, below the floor.
        let raw = 30.0 - 3.0 * (180.0f64 / 32.0).powi(2);
        assert!(raw < -10.0);
        assert_eq!(radar_antenna_gain(&pat, 90.0), -10.0);
    }

    #[test]
    fn gain_toward_uses_boresight() {
        let pat = AntennaPattern::new(30.0, 32.0);
        let r = Position::new(0.0, 0.0);
        let aimed = pat.aimed(&r, &Position::new(0.0, 100.0));
        assert!((aimed.gain_toward_dbi(&r, &Position::new(0.0, 5.0)) - 30.0).abs() < 1e-9);
        let off = Position::new(100.0 * 16f64.to_radians().sin(), 100.0 * 16f64.to_radians().cos());
        assert!((aimed.gain_toward_dbi(&r, &off) - 27.0).abs() < 1e-9);
    }

    #[test]
    fn small_scale_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d = sample_small_scale(&mut rng, 1, 100_000);
        let n = d.s_c.len() as f64;
        let m2: f64 = d.s_c.iter().map(|z| z.norm_sqr()).sum::<f64>() / n;
        let mean: Complex64 = d.s_c.iter().sum::<Complex64>() / n;
        assert!((m2 - 1.0).abs() < 0.02, "second moment {m2}");
        assert!(mean.norm() < 0.02);
    }

    #[test]
    fn small_scale_seeding() {
        let a = sample_small_scale(&mut ChaCha8Rng::seed_from_u64(5), 3, 3);
        let b = sample_small_scale(&mut ChaCha8Rng::seed_from_u64(5), 3, 3);
        let c = sample_small_scale(&mut ChaCha8Rng::seed_from_u64(6), 3, 3);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    fn small_topology(user: Position) -> Topology {
        Topology {
            bs_positions: vec![Position::new(0.0, 0.0), Position::new(200.0, 0.0)],
            radar_positions: vec![Position::new(-500.0, 500.0)],
            user_position: user,
            target_position: Position::new(300.0, 900.0),
            user_antennas: 2,
        }
    }

    #[test]
    fn csi_power_law_scaling() {
        let f = plain_field(40.0, 2.0);
        let pat = AntennaPattern::new(30.0, 32.0);
        // User on a ray through both BSs: a point 10x farther from each.
        let near = small_topology(Position::new(100.0, 100.0));
        let mut far = near.clone();
        far.bs_positions = vec![Position::new(0.0, 0.0)];
        far.user_antennas = 1;
        let mut near1 = near.clone();
        near1.bs_positions = vec![Position::new(0.0, 0.0)];
        near1.user_antennas = 1;
        far.user_position = Position::new(1000.0, 1000.0);
        let a = build_csi(&f, &near1, &pat).unwrap();
        let b = build_csi(&f, &far, &pat).unwrap();
        assert!((b.l_c[0] / a.l_c[0] - 1e-2).abs() < 1e-12);
    }

    #[test]
    fn csi_uses_peak_gain_twice_on_target_link() {
        let f = plain_field(40.0, 2.0);
        let pat = AntennaPattern::new(30.0, 32.0);
        let topo = small_topology(Position::new(100.0, 100.0));
        let csi = build_csi(&f, &topo, &pat).unwrap();
        let d = topo.radar_positions[0].distance(&topo.target_position);
        let hop = (f.wavelength() / (4.0 * PI * d)).powi(2);
        let expected = 1e6 * hop * hop;
        assert!((csi.radar_gain(0) - expected).abs() / expected < 1e-12);
        assert!((csi.radar_cross[0][0] - expected).abs() / expected < 1e-12);
    }

    #[test]
    fn screens_attenuate_target_hops() {
        let mut f = plain_field(40.0, 2.0);
        let pat = AntennaPattern::new(30.0, 32.0);
        let topo = small_topology(Position::new(100.0, 100.0));
        let clear = build_csi(&f, &topo, &pat).unwrap();
        let (r, t) = (topo.radar_positions[0], topo.target_position);
        let mid = Position::new(0.5 * (r.x + t.x), 0.5 * (r.y + t.y));
        let (dx, dy) = (t.y - r.y, r.x - t.x);
        let a = Position::new(mid.x + 1e-3 * dx, mid.y + 1e-3 * dy);
        let b = Position::new(mid.x - 1e-3 * dx, mid.y - 1e-3 * dy);
        f.screens.push(Screen::new(a, b, 10.0));
        let blocked = build_csi(&f, &topo, &pat).unwrap();
        // Cut on the way out and on the way back.
        assert!((blocked.radar_gain(0) / clear.radar_gain(0) - 1e-2).abs() < 1e-12);
    }

    #[test]
    fn csi_target_on_radar_is_degenerate() {
        let f = plain_field(40.0, 2.0);
        let mut topo = small_topology(Position::new(100.0, 100.0));
        topo.target_position = topo.radar_positions[0];
        assert!(build_csi(&f, &topo, &AntennaPattern::new(30.0, 32.0)).is_err());
    }

    #[test]
    fn csi_permutes_with_bs_relabelling() {
        let f = plain_field(40.0, 3.0);
        let pat = AntennaPattern::new(30.0, 32.0);
        let topo = small_topology(Position::new(120.0, 80.0));
        let mut swapped = topo.clone();
        swapped.bs_positions.swap(0, 1);
        let a = build_csi(&f, &topo, &pat).unwrap();
        let b = build_csi(&f, &swapped, &pat).unwrap();
        assert_eq!(a.l_c[0], b.l_c[1]);
        assert_eq!(a.l_c[1], b.l_c[0]);
        assert_eq!(a.l_c_to_r[0], b.l_c_to_r[1]);
        assert_eq!(a.l_r_to_c, b.l_r_to_c);
    }

    proptest! {
        #[test]
        fn pathloss_reciprocal_and_repeatable(
            ax in -1000.0f64..1000.0, ay in -1000.0f64..1000.0,
            bx in -1000.0f64..1000.0, by in -1000.0f64..1000.0,
        ) {
            let mut f = plain_field(41.0, 3.3);
            f.shadowing_sigma_db = 6.0;
            f.shadowing_seed = 99;
            f.screens.push(Screen::new(Position::new(-200.0, -500.0), Position::new(100.0, 600.0), 15.0));
            let (a, b) = (Position::new(ax, ay), Position::new(bx, by));
            prop_assume!(a.distance(&b) > 1e-6);
            let l1 = f.pathloss_db(&a, &b).unwrap();
            prop_assert_eq!(l1, f.pathloss_db(&b, &a).unwrap());
            prop_assert_eq!(l1, f.pathloss_db(&a, &b).unwrap());
        }

        #[test]
        fn antenna_gain_non_increasing(a in 0.0f64..180.0, b in 0.0f64..180.0) {
            let pat = AntennaPattern::new(30.0, 32.0);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(radar_antenna_gain(&pat, lo) >= radar_antenna_gain(&pat, hi));
        }
    }
}
