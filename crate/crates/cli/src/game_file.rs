//! JSON game files:
//! `{"players": n, "actions": [d1, ..., dn], "V": v, "payoffs": [[...], ...]}`
//! with one flat row-major payoff tensor (last player fastest) per player.

use std::fs;
use std::path::Path;

use cpm_core::NormalFormGame;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameFile {
    pub players: usize,
    pub actions: Vec<usize>,
    #[serde(rename = "V")]
    pub utility_bound: f64,
    pub payoffs: Vec<Vec<f64>>,
}

impl GameFile {
    pub fn from_game(game: &NormalFormGame) -> Self {
        Self {
            players: game.num_players(),
            actions: game.action_counts().to_vec(),
            utility_bound: game.utility_bound(),
            payoffs: (0..game.num_players()).map(|i| game.payoffs(i).to_vec()).collect(),
        }
    }

    pub fn into_game(self) -> Result<NormalFormGame> {
        if self.players != self.actions.len() {
            return Err(CliError::Input(format!(
                "\"players\" is {} but \"actions\" lists {} players",
                self.players,
                self.actions.len()
            )));
        }
        NormalFormGame::new(self.actions, self.payoffs, self.utility_bound)
            .map_err(|e| CliError::Input(format!("invalid game: {e}")))
    }
}

pub fn parse_game(text: &str) -> Result<NormalFormGame> {
    let file: GameFile =
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed game file: {e}")))?;
    file.into_game()
}

pub fn load_game(path: &Path) -> Result<NormalFormGame> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_game(&text).map_err(|e| match e {
        CliError::Input(msg) => CliError::Input(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn save_game(path: &Path, game: &NormalFormGame) -> Result<()> {
    let text = serde_json::to_string_pretty(&GameFile::from_game(game)).expect("game file serializes");
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// `n:d1,d2,...:V:seed`
#[derive(Debug, Clone, PartialEq)]
pub struct RandomSpec {
    pub action_counts: Vec<usize>,
    pub utility_bound: f64,
    pub seed: u64,
}

impl RandomSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let bad = |why: &str| CliError::Usage(format!("--random {s:?}: {why} (expected n:d1,d2,...:V:seed)"));
        let parts: Vec<&str> = s.split(':').collect();
        let [n, dims, v, seed] = parts[..] else {
            return Err(bad("wrong number of fields"));
        };
        let n: usize = n.trim().parse().map_err(|_| bad("player count is not an integer"))?;
        let action_counts = dims
            .split(',')
            .map(|d| d.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad("action counts must be integers"))?;
        if action_counts.len() != n {
            return Err(bad("number of action counts differs from n"));
        }
        let utility_bound: f64 = v.trim().parse().map_err(|_| bad("V is not a number"))?;
        let seed: u64 = seed.trim().parse().map_err(|_| bad("seed is not an unsigned integer"))?;
        Ok(Self { action_counts, utility_bound, seed })
    }

    pub fn generate(&self) -> Result<NormalFormGame> {
        NormalFormGame::random(self.action_counts.clone(), self.utility_bound, self.seed)
            .map_err(|e| CliError::Input(format!("cannot generate game: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matching_pennies_round_trip() {
        let mp = NormalFormGame::matching_pennies();
        let text = serde_json::to_string(&GameFile::from_game(&mp)).unwrap();
        assert!(text.contains("\"V\":1.0"));
        assert_eq!(parse_game(&text).unwrap(), mp);
    }

    #[test]
    fn rejects_inconsistent_files() {
        let wrong_len = r#"{"players": 2, "actions": [2, 2], "V": 1, "payoffs": [[1, -1, -1], [-1, 1, 1, -1]]}"#;
        assert!(parse_game(wrong_len).is_err());
        let over_bound = r#"{"players": 2, "actions": [2, 2], "V": 1, "payoffs": [[2, -1, -1, 1], [-1, 1, 1, -1]]}"#;
        assert!(parse_game(over_bound).is_err());
        let players = r#"{"players": 3, "actions": [2, 2], "V": 1, "payoffs": [[1, -1, -1, 1], [-1, 1, 1, -1]]}"#;
        assert!(parse_game(players).is_err());
        assert!(parse_game("{").is_err());
    }

    #[test]
    fn random_spec() {
        let spec = RandomSpec::parse("3:2,3,4:1.5:42").unwrap();
        assert_eq!(spec.action_counts, vec![2, 3, 4]);
        assert_eq!(spec.utility_bound, 1.5);
        assert_eq!(spec.seed, 42);
        assert!(RandomSpec::parse("2:2,2,2:1:0").is_err());
        assert!(RandomSpec::parse("2:2,2:1").is_err());
        assert!(RandomSpec::parse("2:2,x:1:0").is_err());
    }
}
