//! Probabilistic match-outcome model: rating-based win expectancy, expected
//! goals as cubic polynomials of the win expectancy, Poisson goal sampling,
//! and two-legged tie resolution.

use rand::Rng;
use thiserror::Error;

/// Coefficients of the expected-goal polynomials, highest degree first.
///
/// Fitted on two decades of UEFA club competition matches; the home and
/// away sides get separate cubics in the home win expectancy.
#[derive(Debug, Clone, PartialEq)]
pub struct GoalModel {
    pub home_coeffs: [f64; 4],
    pub away_coeffs: [f64; 4],
}

impl Default for GoalModel {
    fn default() -> Self {
        GoalModel {
            home_coeffs: [2.23998, -2.16311, 2.48048, 0.52717],
            away_coeffs: [-0.79773, 2.14427, -3.06285, 2.17402],
        }
    }
}

/// Which side's goal expectation is being evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Venue {
    Home,
    Away,
}

#[derive(Debug, Error, PartialEq)]
pub enum MatchSimError {
    #[error("win expectancy {0} outside [0, 1]")]
    WinExpectancyOutOfRange(f64),
}

/// Expected score share of the home side under the club Elo formula:
/// `1 / (1 + 10^(-(elo_home - elo_away) / 400))`.
pub fn win_expectancy(elo_home: f64, elo_away: f64) -> f64 {
    1.0 / (1.0 + 10f64.powf(-(elo_home - elo_away) / 400.0))
}

/// Win probability for side `a` in a two-legged tie:
/// `1 / (1 + 10^(-sqrt(2) * (elo_a - elo_b) / 400))`.
///
/// The sqrt(2) factor steepens the curve, reflecting that a tie over two
/// legs is harder to upset than a single match.
pub fn two_legged_win_prob(elo_a: f64, elo_b: f64) -> f64 {
    1.0 / (1.0 + 10f64.powf(-std::f64::consts::SQRT_2 * (elo_a - elo_b) / 400.0))
}

fn eval_cubic(coeffs: &[f64; 4], w: f64) -> f64 {
    ((coeffs[0] * w + coeffs[1]) * w + coeffs[2]) * w + coeffs[3]
}

/// Expected goals for one side given the home win expectancy `w`.
pub fn expected_goals(w: f64, venue: Venue, model: &GoalModel) -> Result<f64, MatchSimError> {
    if !(0.0..=1.0).contains(&w) {
        return Err(MatchSimError::WinExpectancyOutOfRange(w));
    }
    let coeffs = match venue {
        Venue::Home => &model.home_coeffs,
        Venue::Away => &model.away_coeffs,
    };
    Ok(eval_cubic(coeffs, w))
}

/// Draws a Poisson variate by Knuth's product-of-uniforms method, which is
/// exact for any rate; the model's rates stay below 3.1 so the expected
/// number of uniforms per draw is small.
pub fn poisson(lambda: f64, rng: &mut impl Rng) -> u32 {
    poisson_from_exp((-lambda).exp(), rng)
}

/// Like [`poisson`], taking the precomputed `exp(-lambda)` so per-fixture
/// rates can be cached across scenarios.
#[inline]
pub fn poisson_from_exp(exp_neg_lambda: f64, rng: &mut impl Rng) -> u32 {
    let mut k = 0u32;
    let mut p = 1.0f64;
    loop {
        p *= rng.gen::<f64>();
        if p <= exp_neg_lambda {
            return k;
        }
        k += 1;
    }
}

/// Samples independent home and away goal counts for one match between
/// sides with the given ratings.
pub fn sample_goals(
    elo_home: f64,
    elo_away: f64,
    model: &GoalModel,
    rng: &mut impl Rng,
) -> (u32, u32) {
    let w = win_expectancy(elo_home, elo_away);
    let lambda_home = eval_cubic(&model.home_coeffs, w);
    let lambda_away = eval_cubic(&model.away_coeffs, w);
    let home_goals = poisson(lambda_home, rng);
    let away_goals = poisson(lambda_away, rng);
    (home_goals, away_goals)
}

/// Resolves a two-legged tie with a single Bernoulli draw; returns true if
/// side `a` advances.
pub fn sample_tie_winner_is_a(elo_a: f64, elo_b: f64, rng: &mut impl Rng) -> bool {
    rng.gen::<f64>() < two_legged_win_prob(elo_a, elo_b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn rng(seed: u64) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(seed)
    }

    #[test]
    fn win_expectancy_reference_values() {
        assert_eq!(win_expectancy(1500.0, 1500.0), 0.5);
        assert!((win_expectancy(2060.21, 1553.15) - 0.9487715010249538).abs() < 1e-12);
        assert!((win_expectancy(1000.0, 1400.0) - 1.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn win_expectancy_sums_to_one() {
        let mut r = rng(1);
        for _ in 0..10_000 {
            let a = 1000.0 + 1500.0 * r.gen::<f64>();
            let b = 1000.0 + 1500.0 * r.gen::<f64>();
            let s = win_expectancy(a, b) + win_expectancy(b, a);
            assert!((s - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn win_expectancy_increasing_in_home_elo() {
        let mut last = 0.0;
        for i in 0..100 {
            let w = win_expectancy(1400.0 + 10.0 * i as f64, 1700.0);
            assert!(w > last);
            last = w;
        }
    }

    #[test]
    fn expected_goals_reference_values() {
        let m = GoalModel::default();
        assert_eq!(expected_goals(0.0, Venue::Home, &m).unwrap(), 0.52717);
        assert_eq!(expected_goals(0.0, Venue::Away, &m).unwrap(), 2.17402);
        assert!((expected_goals(1.0, Venue::Home, &m).unwrap() - 3.08452).abs() < 1e-12);
        assert!((expected_goals(1.0, Venue::Away, &m).unwrap() - 0.45771).abs() < 1e-12);
        assert!((expected_goals(0.5, Venue::Home, &m).unwrap() - 1.50663).abs() < 1e-12);
    }

    #[test]
    fn expected_goals_rejects_out_of_range() {
        let m = GoalModel::default();
        assert_eq!(
            expected_goals(1.5, Venue::Home, &m),
            Err(MatchSimError::WinExpectancyOutOfRange(1.5))
        );
        assert!(expected_goals(-0.01, Venue::Away, &m).is_err());
    }

    #[test]
    fn goal_polynomials_positive_on_unit_interval() {
        let m = GoalModel::default();
        for i in 0..=10_000 {
            let w = i as f64 / 10_000.0;
            assert!(expected_goals(w, Venue::Home, &m).unwrap() > 0.0);
            assert!(expected_goals(w, Venue::Away, &m).unwrap() > 0.0);
        }
    }

    #[test]
    fn two_legged_reference_values() {
        assert_eq!(two_legged_win_prob(1700.0, 1700.0), 0.5);
        assert!((two_legged_win_prob(1800.0, 1700.0) - 0.6929796851293545).abs() < 1e-12);
        let mut r = rng(2);
        for _ in 0..10_000 {
            let a = 1000.0 + 1500.0 * r.gen::<f64>();
            let b = 1000.0 + 1500.0 * r.gen::<f64>();
            let s = two_legged_win_prob(a, b) + two_legged_win_prob(b, a);
            assert!((s - 1.0).abs() <= 1e-12);
            // The two-legged curve is at least as decisive as the single-match one.
            let single = win_expectancy(a, b);
            let double = two_legged_win_prob(a, b);
            assert!((double - 0.5).abs() + 1e-12 >= (single - 0.5).abs());
        }
    }

    #[test]
    fn poisson_moments_match_rate() {
        let mut r = rng(3);
        for lambda in [0.45771, 1.0, 1.50663, 3.08452] {
            let n = 1_000_000u32;
            let mut sum = 0u64;
            let mut sum_sq = 0u64;
            for _ in 0..n {
                let k = poisson(lambda, &mut r) as u64;
                sum += k;
                sum_sq += k * k;
            }
            let mean = sum as f64 / n as f64;
            let var = sum_sq as f64 / n as f64 - mean * mean;
            let se = (lambda / n as f64).sqrt();
            assert!(
                (mean - lambda).abs() < 3.0 * se,
                "mean {mean} vs lambda {lambda}"
            );
            assert!((var - lambda).abs() / lambda < 0.02, "var {var} vs {lambda}");
        }
    }

    #[test]
    fn sampled_goal_means_match_polynomials() {
        let m = GoalModel::default();
        // Equal ratings give w = 0.5.
        let n = 1_000_000u32;
        let mut r = rng(4);
        let mut home_sum = 0u64;
        for _ in 0..n {
            let (h, _) = sample_goals(1700.0, 1700.0, &m, &mut r);
            home_sum += h as u64;
        }
        let mean = home_sum as f64 / n as f64;
        assert!((mean - 1.50663).abs() < 0.01);
    }

    #[test]
    fn sampling_is_deterministic_under_fixed_seed() {
        let m = GoalModel::default();
        let a: Vec<(u32, u32)> = {
            let mut r = rng(7);
            (0..100).map(|_| sample_goals(1900.0, 1600.0, &m, &mut r)).collect()
        };
        let b: Vec<(u32, u32)> = {
            let mut r = rng(7);
            (0..100).map(|_| sample_goals(1900.0, 1600.0, &m, &mut r)).collect()
        };
        assert_eq!(a, b);
        assert!(sample_tie_winner_is_a(3000.0, 1000.0, &mut rng(8)));
    }

    #[test]
    fn tie_winner_frequency_matches_probability() {
        let mut r = rng(9);
        let n = 1_000_000;
        let wins = (0..n)
            .filter(|_| sample_tie_winner_is_a(1700.0, 1700.0, &mut r))
            .count();
        let freq = wins as f64 / n as f64;
        assert!((freq - 0.5).abs() < 0.002);
    }
}
