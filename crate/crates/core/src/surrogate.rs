//! Branching-process surrogate of the exploration: it tracks only counts and
//! the set of undiscovered attributes, never a graph.
//!
//! At step `t` the visited node reveals each still-undiscovered attribute `w`
//! independently with probability `p_w`; `phi_t = prod_{w in W_[t]} q_w` is
//! maintained multiplicatively, the rate is `r_t = phi_{t-1} - phi_t`, and
//! `Z_{t+1} ~ Bin(N_t, ·)` neutral nodes become alive, with `N_t = n - t - Y_t`
//! and the success probability chosen by [`RateRule`].

use rand::seq::index;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Result, RigError};
use crate::graph::ExplorationTrace;
use crate::model::AttributeProfile;
use crate::rng::stream;

/// How newly discovered attributes are drawn at each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiscoveryMode {
    /// Uniform-count sampling when every `p_w` is equal, per-attribute otherwise.
    #[default]
    Auto,
    /// One Bernoulli trial per undiscovered attribute.
    PerAttribute,
    /// `K ~ Bin(|undiscovered|, p)` then a uniform `K`-subset; uniform profiles only.
    UniformCount,
}

/// Success probability used for the `Z_{t+1}` draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RateRule {
    /// `r_t = phi_{t-1} - phi_t`, the unconditional probability that a node
    /// misses `W_[t-1]` and meets the new attributes. Stopping times come out
    /// stochastically smaller than component sizes once `phi` drops well below 1.
    Difference,
    /// `1 - phi_t / phi_{t-1} = r_t / phi_{t-1}`: the probability that a neutral
    /// node, already known to miss `W_[t-1]`, holds a newly discovered
    /// attribute. With this rule the stopping time has the law of `|C(v0)|`.
    #[default]
    Conditional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SurrogateOptions {
    pub mode: DiscoveryMode,
    pub rate: RateRule,
}

#[derive(Debug, Clone)]
pub struct SurrogateState<'a> {
    profile: &'a AttributeProfile,
    uniform_p: Option<f64>,
    options: SurrogateOptions,
    pub n: usize,
    pub t: usize,
    pub y: usize,
    /// Attributes with discovery time `Γ_w > t`.
    pub undiscovered: Vec<u32>,
    pub phi: f64,
    /// Attributes in discovery order.
    pub discovered: Vec<u32>,
    /// Rate `r_{t-1}` and binomial probability used by the last step.
    pub last_rate: f64,
    pub last_success_prob: f64,
}

impl<'a> SurrogateState<'a> {
    pub fn new(n: usize, profile: &'a AttributeProfile, options: SurrogateOptions) -> Result<Self> {
        if n < 1 {
            return Err(RigError::Size("n must be at least 1".into()));
        }
        let uniform_p = profile.uniform_value();
        if options.mode == DiscoveryMode::UniformCount && uniform_p.is_none() && !profile.is_empty()
        {
            return Err(RigError::Input(
                "uniform-count discovery needs a uniform profile".into(),
            ));
        }
        Ok(Self {
            profile,
            uniform_p,
            options,
            n,
            t: 0,
            y: 1,
            undiscovered: (0..profile.m() as u32).collect(),
            phi: 1.0,
            discovered: Vec::new(),
            last_rate: 0.0,
            last_success_prob: 0.0,
        })
    }

    /// `N_t = n - t - Y_t`.
    pub fn neutral(&self) -> usize {
        self.n - self.t - self.y
    }

    fn discover<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let use_count = match self.options.mode {
            DiscoveryMode::Auto | DiscoveryMode::UniformCount => self.uniform_p,
            DiscoveryMode::PerAttribute => None,
        };
        let before = self.discovered.len();
        match use_count {
            Some(p) => {
                let len = self.undiscovered.len();
                let k = Binomial::new(len as u64, p)
                    .expect("p in (0,1)")
                    .sample(rng) as usize;
                let mut picks: Vec<usize> = index::sample(rng, len, k).into_vec();
                // Remove from the back so earlier positions stay valid.
                picks.sort_unstable_by(|a, b| b.cmp(a));
                for i in picks {
                    self.discovered.push(self.undiscovered.swap_remove(i));
                }
            }
            None => {
                let profile = self.profile;
                let discovered = &mut self.discovered;
                self.undiscovered.retain(|&w| {
                    let hit = rng.random::<f64>() < profile.probs()[w as usize];
                    if hit {
                        discovered.push(w);
                    }
                    !hit
                });
            }
        }
        for &w in &self.discovered[before..] {
            self.phi *= self.profile.q(w as usize);
        }
    }

    /// Visits the next node and returns `Z_{t+1}`.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<usize> {
        if self.y == 0 {
            return Err(RigError::State("step called with no alive nodes".into()));
        }
        let phi_prev = self.phi;
        self.discover(rng);
        let rate = phi_prev - self.phi;
        let prob = match self.options.rate {
            RateRule::Difference => rate,
            RateRule::Conditional => 1.0 - self.phi / phi_prev,
        };
        let neutral = self.neutral();
        let z = if neutral == 0 || prob <= 0.0 {
            0
        } else {
            Binomial::new(neutral as u64, prob.min(1.0))
                .expect("probability in [0,1]")
                .sample(rng) as usize
        };
        self.last_rate = rate;
        self.last_success_prob = prob;
        self.y = self.y + z - 1;
        self.t += 1;
        Ok(z)
    }
}

pub fn run_surrogate(n: usize, profile: &AttributeProfile, seed: u64) -> Result<ExplorationTrace> {
    run_surrogate_with(n, profile, seed, 0, SurrogateOptions::default())
}

/// Runs replication `rep` on the stream `(seed, "surrogate", rep)` until `Y_t = 0`.
/// Because `N_t >= 0`, this happens no later than `t = n`.
pub fn run_surrogate_with(
    n: usize,
    profile: &AttributeProfile,
    seed: u64,
    rep: u64,
    options: SurrogateOptions,
) -> Result<ExplorationTrace> {
    let mut rng = stream(seed, "surrogate", &[rep]);
    let mut state = SurrogateState::new(n, profile, options)?;
    let mut trace = ExplorationTrace::empty(0, n);
    while state.y > 0 {
        let z = state.step(&mut rng)?;
        trace.z.push(z);
        trace.y.push(state.y);
        trace.r.push(state.last_rate);
        trace.draw_prob.push(state.last_success_prob);
        trace.phi.push(state.phi);
        trace.wcum.push(state.discovered.len());
    }
    trace.discovered = state.discovered;
    trace.stop_time = state.t;
    Ok(trace)
}

/// Parameters `(n - 1, 1 - prod_{tau < t} (1 - r_tau))` of the binomial law of
/// `Y_t + t - 1` given the recorded history, for `1 <= t <= stop_time`.
///
/// The rates are the probabilities actually used for the `Z` draws
/// (`draw_prob`), falling back to `r` when no draw probabilities are recorded.
pub fn marginal_alive_law(trace: &ExplorationTrace, t: usize) -> Result<(usize, f64)> {
    let rates = if trace.draw_prob.is_empty() {
        &trace.r
    } else {
        &trace.draw_prob
    };
    if t == 0 || t > rates.len() {
        return Err(RigError::Range(format!(
            "t = {t} outside 1..={} (rates recorded)",
            rates.len()
        )));
    }
    let survive: f64 = rates[..t].iter().map(|r| 1.0 - r).product();
    Ok((trace.n - 1, 1.0 - survive))
}

/// Two-stage binomial: `Λ1 ~ Bin(m, ν1)`, then `Λ2 | Λ1 ~ Bin(Λ1, ν2)`.
pub fn thinning_sampler<R: Rng + ?Sized>(
    m_trials: u64,
    nu1: f64,
    nu2: f64,
    rng: &mut R,
) -> Result<(u64, u64)> {
    for (name, v) in [("nu1", nu1), ("nu2", nu2)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(RigError::Range(format!("{name} = {v} outside [0, 1]")));
        }
    }
    let l1 = Binomial::new(m_trials, nu1).expect("checked").sample(rng);
    let l2 = Binomial::new(l1, nu2).expect("checked").sample(rng);
    Ok((l1, l2))
}
