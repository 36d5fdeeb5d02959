//! Navigation evaluation metrics (SR, SEL, %Rooms) and the composite training
//! objective, as pure functions over already-computed quantities.

use crate::error::{Error, Result};
use crate::types::Episode;

/// Fraction of successful episodes, in [0, 1].
pub fn success_rate(episodes: &[Episode]) -> Result<f64> {
    if episodes.is_empty() {
        return Err(Error::EmptyInput("episodes"));
    }
    let hits = episodes.iter().filter(|e| e.success).count();
    Ok(hits as f64 / episodes.len() as f64)
}

/// Episode-length weighted success:
/// `(1/N) * sum_i S_i * w_i / max(w_i, e_i)`, in [0, 1].
pub fn sel(episodes: &[Episode]) -> Result<f64> {
    if episodes.is_empty() {
        return Err(Error::EmptyInput("episodes"));
    }
    let mut sum = 0.0;
    for ep in episodes {
        if ep.shortest_len == 0 || ep.episode_len == 0 {
            return Err(Error::NonPositiveLength);
        }
        if ep.success {
            let w = ep.shortest_len as f64;
            let e = ep.episode_len as f64;
            sum += w / w.max(e);
        }
    }
    Ok(sum / episodes.len() as f64)
}

/// Mean percentage of distinct rooms visited per episode, in [0, 100].
pub fn pct_rooms(episodes: &[Episode]) -> Result<f64> {
    if episodes.is_empty() {
        return Err(Error::EmptyInput("episodes"));
    }
    let mut sum = 0.0;
    for ep in episodes {
        if ep.total_rooms == 0 {
            return Err(Error::InvalidEpisode("total_rooms must be >= 1".into()));
        }
        if ep.rooms_visited.len() > ep.total_rooms {
            return Err(Error::RoomsExceedTotal {
                visited: ep.rooms_visited.len(),
                total: ep.total_rooms,
            });
        }
        sum += 100.0 * ep.rooms_visited.len() as f64 / ep.total_rooms as f64;
    }
    Ok(sum / episodes.len() as f64)
}

/// Behavior-cloning action loss: sum of per-step cross-entropy values.
pub fn action_loss(per_step_ce: &[f64]) -> f64 {
    per_step_ce.iter().sum()
}

/// Answer loss: negated sum of per-token log-probabilities. Errors on a
/// positive log-probability.
pub fn answer_loss(token_logprobs: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    for &lp in token_logprobs {
        if lp > 0.0 {
            return Err(Error::PositiveLogProb(lp));
        }
        sum += lp;
    }
    Ok(-sum)
}

/// Inputs to the composite objective.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveInputs {
    pub action_losses: Vec<f64>,
    pub answer_token_logprobs: Vec<f64>,
    pub occ_loss: f64,
    pub lambda_occ: f64,
}

impl ObjectiveInputs {
    pub fn validate(&self) -> Result<()> {
        if self.action_losses.iter().any(|v| !v.is_finite())
            || self.answer_token_logprobs.iter().any(|v| !v.is_finite())
        {
            return Err(Error::InvalidConfig("non-finite loss term".into()));
        }
        if !self.occ_loss.is_finite() || self.occ_loss < 0.0 {
            return Err(Error::InvalidConfig(format!("occ_loss {} must be >= 0", self.occ_loss)));
        }
        if !self.lambda_occ.is_finite() || self.lambda_occ < 0.0 {
            return Err(Error::InvalidConfig(format!("lambda_occ {} must be >= 0", self.lambda_occ)));
        }
        Ok(())
    }
}

/// `L = L_action + L_answer + lambda_occ * L_occ`.
pub fn composite_objective(inp: &ObjectiveInputs) -> Result<f64> {
    inp.validate()?;
    Ok(action_loss(&inp.action_losses)
        + answer_loss(&inp.answer_token_logprobs)?
        + inp.lambda_occ * inp.occ_loss)
}
