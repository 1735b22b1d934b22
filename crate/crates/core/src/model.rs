//! Node placement, path loss and block-fading channel generation.
//!
//! Every fading state is generated from its own ChaCha stream: the root seed
//! keys the generator and the state index selects the stream, so state `i`
//! is the same whatever order or worker evaluates it.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::config::{NetworkConfig, PathLoss, Ring};
use crate::error::{Error, Result};

/// Stream reserved for the shared topology in fixed-topology runs.
const FIXED_TOPOLOGY_STREAM: u64 = u64::MAX;

/// Closest admissible separation between two nodes, meters.
const MIN_SEPARATION: f64 = 1e-6;

pub type Point = [f64; 2];

fn distance(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Linear power gain of the log-distance model at `d` meters.
pub fn pathloss_linear(d: f64, pathloss: &PathLoss) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::NonPositiveDistance(d));
    }
    Ok(gain_at(d, pathloss))
}

fn gain_at(d: f64, pathloss: &PathLoss) -> f64 {
    let loss_db = pathloss.intercept_db + pathloss.exponent_coeff_db * d.log10();
    10f64.powf(-loss_db / 10.0)
}

/// Node positions. The primary transmitter sits at the origin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Topology {
    pub prx: Point,
    pub chap: Point,
    /// Secondary users `1..=K`.
    pub sus: Vec<Point>,
    pub eavs: Vec<Point>,
}

impl Topology {
    pub const PTX: Point = [0.0, 0.0];
}

/// Uniform-in-area draw from an annulus.
fn sample_ring<R: Rng + ?Sized>(ring: Ring, rng: &mut R) -> Point {
    let u: f64 = rng.gen();
    let r2 = ring.inner * ring.inner + u * (ring.outer * ring.outer - ring.inner * ring.inner);
    let r = r2.sqrt();
    let phi = rng.gen::<f64>() * std::f64::consts::TAU;
    [r * phi.cos(), r * phi.sin()]
}

/// Draws of one node (or node pair) within one fading state.
///
/// Each node reads its own segment of the state's keystream, positions and
/// gains in separate halves, so adding users or eavesdroppers leaves every
/// other draw of the state unchanged.
#[derive(Debug, Clone, Copy)]
enum Node {
    Primary,
    Su(usize),
    Eav(usize),
    Pair(usize, usize),
}

/// Words of keystream reserved per node; positions use the first half.
const NODE_SEGMENT_BITS: u32 = 24;

impl Node {
    /// Distinct for up to 2^20 users and 2^16 eavesdroppers.
    fn id(self) -> u128 {
        match self {
            Node::Primary => 0,
            Node::Su(k) => 1 + k as u128,
            Node::Eav(n) => (1 << 20) + n as u128,
            Node::Pair(k, n) => (1 << 22) + ((k as u128) << 16) + n as u128,
        }
    }

    fn rng(self, seed: u64, stream: u64, gains: bool) -> ChaCha8Rng {
        let mut rng = state_rng(seed, stream);
        let half = u128::from(gains) << (NODE_SEGMENT_BITS - 1);
        rng.set_word_pos((self.id() << NODE_SEGMENT_BITS) | half);
        rng
    }
}

/// Node positions for the state drawn from `stream` of `seed`.
pub fn sample_topology(cfg: &NetworkConfig, seed: u64, stream: u64) -> Topology {
    let mut primary = Node::Primary.rng(seed, stream, false);
    let prx = sample_ring(cfg.geometry.prx, &mut primary);
    let chap = sample_ring(cfg.geometry.nodes, &mut primary);
    let place = |node: Node| sample_ring(cfg.geometry.nodes, &mut node.rng(seed, stream, false));
    Topology {
        prx,
        chap,
        sus: (0..cfg.num_sus).map(|k| place(Node::Su(k))).collect(),
        eavs: (0..cfg.num_eavs).map(|n| place(Node::Eav(n))).collect(),
    }
}

/// Linear channel power gains of one fading block.
///
/// SU-indexed vectors have `K + 1` entries; entry 0 is the virtual user,
/// whose gains are all zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FadingState {
    /// SU to access point.
    pub h_ss: Vec<f64>,
    /// SU to primary receiver.
    pub h_sp: Vec<f64>,
    /// SU to eavesdropper, indexed `[k][n]`.
    pub h_se: Vec<Vec<f64>>,
    /// Primary link.
    pub h_pp: f64,
    /// Primary transmitter to SU.
    pub h_pst: Vec<f64>,
    /// Primary transmitter to access point.
    pub h_psr: f64,
    /// Primary transmitter to eavesdropper.
    pub h_pe: Vec<f64>,
}

impl FadingState {
    /// Number of actual secondary users.
    pub fn num_sus(&self) -> usize {
        self.h_ss.len() - 1
    }

    pub fn num_eavs(&self) -> usize {
        self.h_pe.len()
    }

    /// A state with every gain zero.
    pub fn zeros(num_sus: usize, num_eavs: usize) -> Self {
        Self {
            h_ss: vec![0.0; num_sus + 1],
            h_sp: vec![0.0; num_sus + 1],
            h_se: vec![vec![0.0; num_eavs]; num_sus + 1],
            h_pp: 0.0,
            h_pst: vec![0.0; num_sus + 1],
            h_psr: 0.0,
            h_pe: vec![0.0; num_eavs],
        }
    }

    /// Overwrites every gain on a link touching an eavesdropper.
    pub fn with_eav_gains(mut self, mut gain: impl FnMut() -> f64) -> Self {
        for row in self.h_se.iter_mut().skip(1) {
            row.iter_mut().for_each(|g| *g = gain());
        }
        self.h_pe.iter_mut().for_each(|g| *g = gain());
        self
    }
}

/// Small-scale fading over `topology` for the state drawn from `stream` of `seed`.
pub fn draw_fading_state(
    topology: &Topology,
    cfg: &NetworkConfig,
    seed: u64,
    stream: u64,
) -> FadingState {
    let pl = &cfg.pathloss;
    let link = |rng: &mut ChaCha8Rng, a: Point, b: Point| {
        let g: f64 = rng.sample(Exp1);
        gain_at(distance(a, b).max(MIN_SEPARATION), pl) * g
    };
    let ptx = Topology::PTX;
    let mut state = FadingState::zeros(topology.sus.len(), topology.eavs.len());

    let mut rng = Node::Primary.rng(seed, stream, true);
    state.h_pp = link(&mut rng, ptx, topology.prx);
    state.h_psr = link(&mut rng, ptx, topology.chap);
    for (n, &eav) in topology.eavs.iter().enumerate() {
        state.h_pe[n] = link(&mut Node::Eav(n).rng(seed, stream, true), ptx, eav);
    }
    for (k, &su) in topology.sus.iter().enumerate() {
        let idx = k + 1;
        let mut rng = Node::Su(k).rng(seed, stream, true);
        state.h_ss[idx] = link(&mut rng, su, topology.chap);
        state.h_sp[idx] = link(&mut rng, su, topology.prx);
        state.h_pst[idx] = link(&mut rng, ptx, su);
        for (n, &eav) in topology.eavs.iter().enumerate() {
            state.h_se[idx][n] = link(&mut Node::Pair(k, n).rng(seed, stream, true), su, eav);
        }
    }
    state
}

/// Generator for the `index`-th fading state of a run.
pub fn state_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// The topology shared by all states when `fixed_topology` is set.
pub fn fixed_topology(cfg: &NetworkConfig) -> Topology {
    sample_topology(cfg, cfg.seed, FIXED_TOPOLOGY_STREAM)
}

/// The `index`-th fading state of the run keyed by `cfg.seed`.
pub fn generate_state(cfg: &NetworkConfig, index: u64) -> FadingState {
    if cfg.fixed_topology {
        draw_fading_state(&fixed_topology(cfg), cfg, cfg.seed, index)
    } else {
        let topology = sample_topology(cfg, cfg.seed, index);
        draw_fading_state(&topology, cfg, cfg.seed, index)
    }
}

/// States `0..count` of the run keyed by `cfg.seed`.
pub fn generate_ensemble(cfg: &NetworkConfig, count: usize) -> Vec<FadingState> {
    let topology = cfg.fixed_topology.then(|| fixed_topology(cfg));
    (0..count as u64)
        .map(|i| match &topology {
            Some(t) => draw_fading_state(t, cfg, cfg.seed, i),
            None => draw_fading_state(&sample_topology(cfg, cfg.seed, i), cfg, cfg.seed, i),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm(p: Point) -> f64 {
        distance(p, Topology::PTX)
    }

    #[test]
    fn pathloss_values() {
        let pl = PathLoss::default();
        assert!((pathloss_linear(1.0, &pl).unwrap() - 1e-3).abs() < 1e-15);
        assert!((pathloss_linear(10.0, &pl).unwrap() - 10f64.powf(-5.5)).abs() < 1e-18);
        assert!((pathloss_linear(10.0, &pl).unwrap() - 3.162e-6).abs() < 1e-9);
        assert!((pathloss_linear(100.0, &pl).unwrap() - 1e-8).abs() < 1e-20);
        assert!(matches!(
            pathloss_linear(0.0, &pl),
            Err(Error::NonPositiveDistance(_))
        ));
        assert!(pathloss_linear(-2.0, &pl).is_err());
    }

    #[test]
    fn degenerate_rings_pin_distance() {
        let mut cfg = NetworkConfig::default();
        cfg.geometry.prx = Ring::new(10.0, 10.0);
        cfg.geometry.nodes = Ring::new(10.0, 10.0);
        let topo = sample_topology(&cfg, 3, 0);
        for p in [topo.prx, topo.chap]
            .into_iter()
            .chain(topo.sus.iter().copied())
            .chain(topo.eavs.iter().copied())
        {
            assert!((norm(p) - 10.0).abs() < 1e-9);
        }
    }

    #[test]
    fn default_rings_respected() {
        let cfg = NetworkConfig::default();
        for i in 0..2000 {
            let t = sample_topology(&cfg, 11, i);
            let d = norm(t.prx);
            assert!((5.0..=10.0).contains(&d), "{d}");
            for p in t.sus.iter().chain(&t.eavs).chain(std::iter::once(&t.chap)) {
                assert!((10.0..=20.0).contains(&norm(*p)));
            }
        }
    }

    #[test]
    fn annulus_is_uniform_in_area() {
        // Fraction inside the median-area radius should be one half.
        let ring = Ring::new(10.0, 20.0);
        let r_med = ((100.0 + 400.0) / 2.0f64).sqrt();
        let mut rng = state_rng(5, 0);
        let n = 100_000;
        let inside = (0..n)
            .filter(|_| norm(sample_ring(ring, &mut rng)) < r_med)
            .count();
        let frac = inside as f64 / n as f64;
        let se = (0.25 / n as f64).sqrt();
        assert!((frac - 0.5).abs() < 4.0 * se, "{frac}");
    }

    #[test]
    fn virtual_user_gains_are_zero() {
        let cfg = NetworkConfig::default();
        let s = generate_state(&cfg, 9);
        assert_eq!(s.h_ss[0], 0.0);
        assert_eq!(s.h_sp[0], 0.0);
        assert_eq!(s.h_pst[0], 0.0);
        assert!(s.h_se[0].iter().all(|&g| g == 0.0));
        assert_eq!(s.num_sus(), cfg.num_sus);
        assert_eq!(s.num_eavs(), cfg.num_eavs);
        assert!(s.h_ss[1..].iter().all(|&g| g > 0.0 && g.is_finite()));
    }

    #[test]
    fn deterministic_replay() {
        let cfg = NetworkConfig::default();
        let a = generate_ensemble(&cfg, 20);
        let b = generate_ensemble(&cfg, 20);
        assert_eq!(a, b);
        assert_eq!(a[7], generate_state(&cfg, 7));
        let t1 = sample_topology(&cfg, 4, 2);
        let t2 = sample_topology(&cfg, 4, 2);
        assert_eq!(t1, t2);
        let mut other = cfg.clone();
        other.seed += 1;
        assert_ne!(a[0], generate_state(&other, 0));
    }

    #[test]
    fn node_segments_fit_the_keystream() {
        // ChaCha word positions carry 68 bits.
        let top = Node::Pair((1 << 20) - 1, (1 << 16) - 1).id() << NODE_SEGMENT_BITS;
        assert!(top < 1 << 68);
        assert!(Node::Su((1 << 20) - 2).id() < Node::Eav(0).id());
        assert!(Node::Eav((1 << 16) - 1).id() < Node::Pair(0, 0).id());
        let draw = |node: Node| node.rng(1, 0, true).gen::<u64>();
        assert_ne!(draw(Node::Primary), draw(Node::Pair(0, 0)));
        assert_ne!(draw(Node::Su(0)), draw(Node::Pair(1, 0)));
    }

    #[test]
    fn growing_the_network_keeps_existing_draws() {
        let cfg = NetworkConfig::default().with_counts(3, 2);
        let big = cfg.with_counts(5, 4);
        for i in 0..10 {
            let (a, b) = (generate_state(&cfg, i), generate_state(&big, i));
            assert_eq!(a.h_pp, b.h_pp);
            assert_eq!(a.h_psr, b.h_psr);
            assert_eq!(a.h_ss[..], b.h_ss[..4]);
            assert_eq!(a.h_pst[..], b.h_pst[..4]);
            assert_eq!(a.h_pe[..], b.h_pe[..2]);
            for k in 1..=3 {
                assert_eq!(a.h_se[k][..], b.h_se[k][..2]);
            }
        }
    }

    #[test]
    fn fixed_topology_mean_gain_matches_pathloss() {
        let mut cfg = NetworkConfig::default();
        cfg.fixed_topology = true;
        let topo = fixed_topology(&cfg);
        let expected = pathloss_linear(norm(topo.prx), &cfg.pathloss).unwrap();
        let n = 100_000;
        let samples: Vec<f64> = generate_ensemble(&cfg, n).iter().map(|s| s.h_pp).collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - expected).abs() < 3.0 * se);
        // Small-scale factor mean within 1%.
        assert!((mean / expected - 1.0).abs() < 0.01);
    }
}
