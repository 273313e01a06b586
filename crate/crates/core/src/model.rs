//! Domain types and season data: team rosters, design formats, seeding
//! policies and pot assignment.

use std::collections::HashSet;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of teams in a season roster (new-design field).
pub const ROSTER_SIZE: usize = 36;
/// Number of teams taking part in the old design.
pub const OLD_DESIGN_SIZE: usize = 32;
/// Both designs seed the field into four pots.
pub const POT_COUNT: usize = 4;

/// A club taking part in the season under study.
///
/// `uefa_rank` is the position in the season's UEFA club coefficient
/// ranking (1 = highest). Ratings are a fixed pre-season snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Team {
    pub id: String,
    pub name: String,
    pub association: String,
    pub elo: f64,
    pub uefa_rank: u32,
    pub titleholder: bool,
    pub in_old_design: bool,
}

/// A validated set of 36 teams for one season, 32 of which also appear
/// in the old design.
#[derive(Debug, Clone)]
pub struct SeasonRoster {
    pub season_label: String,
    pub teams: Vec<Team>,
}

/// Tournament format: eight groups of four, or the 36-team league phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Design {
    Old,
    New,
}

impl Design {
    pub fn team_count(self) -> usize {
        match self {
            Design::Old => OLD_DESIGN_SIZE,
            Design::New => ROSTER_SIZE,
        }
    }

    pub fn pot_size(self) -> usize {
        self.team_count() / POT_COUNT
    }
}

/// How teams are ordered before being split into pots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeedingPolicy {
    /// Official seeding: UEFA club coefficient order, titleholder forced
    /// into Pot 1.
    UefaCoefficient,
    /// Counterfactual seeding by the strength ratings that also drive the
    /// match model. No titleholder exception.
    Elo,
}

/// Four pots of team indices (into the roster subset the assignment was
/// built from), ordered strongest pot first.
#[derive(Debug, Clone)]
pub struct PotAssignment {
    pub design: Design,
    pub policy: SeedingPolicy,
    pub pots: Vec<Vec<usize>>,
}

#[derive(Debug, Error)]
pub enum RosterError {
    #[error("row {row}: {source}")]
    Csv { row: usize, source: csv::Error },
    #[error("wrong team count: expected {ROSTER_SIZE} teams, found {found}")]
    WrongTeamCount { found: usize },
    #[error("row {row}: duplicate team id `{id}`")]
    DuplicateId { row: usize, id: String },
    #[error("row {row}: duplicate uefa_rank {rank} (also used by `{other}`)")]
    DuplicateUefaRank { row: usize, rank: u32, other: String },
    #[error("row {row}: team `{id}` has non-positive elo {elo}")]
    NonPositiveElo { row: usize, id: String, elo: f64 },
    #[error("expected exactly one titleholder, found {found}")]
    TitleholderCount { found: usize },
    #[error("expected {OLD_DESIGN_SIZE} teams with in_old_design=true, found {found}")]
    WrongOldDesignCount { found: usize },
    #[error(
        "association `{association}` has {count} teams in the old design; \
         at most 4 fit the one-per-group constraint"
    )]
    AssociationOverload { association: String, count: usize },
    #[error("failed to read roster: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum PotError {
    #[error("{design:?} design needs {expected} teams, got {found}")]
    WrongTeamCount {
        design: Design,
        expected: usize,
        found: usize,
    },
}

/// Parses and validates a season roster from CSV.
///
/// Columns: `id,name,association,elo,uefa_rank,titleholder,in_old_design`.
pub fn load_roster<R: Read>(source: R, season_label: &str) -> Result<SeasonRoster, RosterError> {
    let mut reader = csv::Reader::from_reader(source);
    let mut teams: Vec<Team> = Vec::new();
    for (i, record) in reader.deserialize::<Team>().enumerate() {
        let row = i + 2; // header is row 1
        let team = record.map_err(|source| RosterError::Csv { row, source })?;
        if !(team.elo > 0.0) || !team.elo.is_finite() {
            return Err(RosterError::NonPositiveElo {
                row,
                id: team.id,
                elo: team.elo,
            });
        }
        if let Some(prev) = teams.iter().find(|t| t.id == team.id) {
            return Err(RosterError::DuplicateId {
                row,
                id: prev.id.clone(),
            });
        }
        if let Some(prev) = teams.iter().find(|t| t.uefa_rank == team.uefa_rank) {
            return Err(RosterError::DuplicateUefaRank {
                row,
                rank: team.uefa_rank,
                other: prev.id.clone(),
            });
        }
        teams.push(team);
    }

    if teams.len() != ROSTER_SIZE {
        return Err(RosterError::WrongTeamCount { found: teams.len() });
    }
    let titleholders = teams.iter().filter(|t| t.titleholder).count();
    if titleholders != 1 {
        return Err(RosterError::TitleholderCount {
            found: titleholders,
        });
    }
    let old_count = teams.iter().filter(|t| t.in_old_design).count();
    if old_count != OLD_DESIGN_SIZE {
        return Err(RosterError::WrongOldDesignCount { found: old_count });
    }
    // The old-design group draw places at most one team per association in
    // each of the 8 groups drawn from pots of 8; five or more teams from a
    // single association is treated as corrupt input.
    let mut assocs: Vec<&str> = teams
        .iter()
        .filter(|t| t.in_old_design)
        .map(|t| t.association.as_str())
        .collect();
    assocs.sort_unstable();
    for chunk in assocs.chunk_by(|a, b| a == b) {
        if chunk.len() >= 5 {
            return Err(RosterError::AssociationOverload {
                association: chunk[0].to_string(),
                count: chunk.len(),
            });
        }
    }

    Ok(SeasonRoster {
        season_label: season_label.to_string(),
        teams,
    })
}

/// Serializes a roster back to the CSV format accepted by [`load_roster`].
pub fn write_roster<W: Write>(roster: &SeasonRoster, out: W) -> Result<(), csv::Error> {
    let mut writer = csv::Writer::from_writer(out);
    for team in &roster.teams {
        writer.serialize(team)?;
    }
    writer.flush()?;
    Ok(())
}

/// The 32 teams that take part in the old design, in roster order.
pub fn old_design_roster(roster: &SeasonRoster) -> Vec<Team> {
    roster
        .teams
        .iter()
        .filter(|t| t.in_old_design)
        .cloned()
        .collect()
}

/// Splits `teams` into four pots under the given design and policy.
///
/// UEFA seeding sorts by coefficient rank and moves the titleholder to the
/// front; Elo seeding sorts by rating alone (exact rating ties fall back to
/// coefficient rank so the split is deterministic).
pub fn assign_pots(
    teams: &[Team],
    design: Design,
    policy: SeedingPolicy,
) -> Result<PotAssignment, PotError> {
    if teams.len() != design.team_count() {
        return Err(PotError::WrongTeamCount {
            design,
            expected: design.team_count(),
            found: teams.len(),
        });
    }
    let mut order: Vec<usize> = (0..teams.len()).collect();
    match policy {
        SeedingPolicy::UefaCoefficient => {
            order.sort_by_key(|&i| teams[i].uefa_rank);
            if let Some(pos) = order.iter().position(|&i| teams[i].titleholder) {
                let holder = order.remove(pos);
                order.insert(0, holder);
            }
        }
        SeedingPolicy::Elo => {
            order.sort_by(|&a, &b| {
                teams[b]
                    .elo
                    .total_cmp(&teams[a].elo)
                    .then(teams[a].uefa_rank.cmp(&teams[b].uefa_rank))
            });
        }
    }
    let pots = order
        .chunks(design.pot_size())
        .map(|chunk| chunk.to_vec())
        .collect();
    Ok(PotAssignment {
        design,
        policy,
        pots,
    })
}

/// Season labels with data shipped inside the library.
pub const BUNDLED_SEASONS: &[&str] = &["2024-25"];

const SEASON_2024_25: &str = include_str!("../data/season_2024_25.csv");

/// Returns the bundled roster for a season label, if shipped.
pub fn bundled_roster(season_label: &str) -> Option<SeasonRoster> {
    match season_label {
        "2024-25" => Some(
            load_roster(SEASON_2024_25.as_bytes(), "2024-25")
                .expect("bundled 2024-25 season data is valid"),
        ),
        _ => None,
    }
}

impl SeasonRoster {
    /// Index of the team with the given id.
    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.teams.iter().position(|t| t.id == id)
    }
}

/// Dense association ids for a team slice, used by the draw engines.
pub fn association_ids(teams: &[Team]) -> Vec<u8> {
    let mut seen: Vec<&str> = Vec::new();
    teams
        .iter()
        .map(|t| {
            match seen.iter().position(|a| *a == t.association) {
                Some(i) => i as u8,
                None => {
                    seen.push(&t.association);
                    (seen.len() - 1) as u8
                }
            }
        })
        .collect()
}

/// Checks that an assignment's pots partition `0..n_teams`.
pub fn is_partition(pots: &[Vec<usize>], n_teams: usize) -> bool {
    let mut seen = HashSet::new();
    let total: usize = pots.iter().map(|p| p.len()).sum();
    total == n_teams
        && pots
            .iter()
            .flatten()
            .all(|&i| i < n_teams && seen.insert(i))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roster() -> SeasonRoster {
        bundled_roster("2024-25").unwrap()
    }

    #[test]
    fn bundled_roster_loads() {
        let r = roster();
        assert_eq!(r.teams.len(), 36);
        let holder: Vec<_> = r.teams.iter().filter(|t| t.titleholder).collect();
        assert_eq!(holder.len(), 1);
        assert_eq!(holder[0].id, "real-madrid");
        let new_only: Vec<_> = r
            .teams
            .iter()
            .filter(|t| !t.in_old_design)
            .map(|t| t.id.as_str())
            .collect();
        assert_eq!(
            new_only,
            vec!["borussia-dortmund", "lille", "slovan-bratislava", "bologna"]
        );
    }

    #[test]
    fn old_roster_has_32_teams() {
        let old = old_design_roster(&roster());
        assert_eq!(old.len(), 32);
        assert!(old.iter().all(|t| t.in_old_design));
        assert!(old.iter().any(|t| t.id == "girona"));
        assert!(old.iter().any(|t| t.id == "aston-villa"));
        assert!(!old.iter().any(|t| t.id == "borussia-dortmund"));
    }

    #[test]
    fn wrong_team_count_rejected() {
        let full = SEASON_2024_25;
        let trimmed: String = full.lines().take(36).collect::<Vec<_>>().join("\n");
        let err = load_roster(trimmed.as_bytes(), "x").unwrap_err();
        assert!(matches!(err, RosterError::WrongTeamCount { found: 35 }));
    }

    #[test]
    fn two_titleholders_rejected() {
        let doctored = SEASON_2024_25.replace(
            "manchester-city,Manchester City,ENG,2060.206055,2,false",
            "manchester-city,Manchester City,ENG,2060.206055,2,true",
        );
        let err = load_roster(doctored.as_bytes(), "x").unwrap_err();
        assert!(matches!(err, RosterError::TitleholderCount { found: 2 }));
    }

    #[test]
    fn duplicate_rank_rejected() {
        let doctored = SEASON_2024_25.replace(
            "manchester-city,Manchester City,ENG,2060.206055,2,false",
            "manchester-city,Manchester City,ENG,2060.206055,1,false",
        );
        let err = load_roster(doctored.as_bytes(), "x").unwrap_err();
        assert!(matches!(err, RosterError::DuplicateUefaRank { rank: 1, .. }));
    }

    #[test]
    fn association_overload_rejected() {
        // Flagging Dortmund into the old design gives Germany five old-design teams.
        let doctored = SEASON_2024_25
            .replace(
                "borussia-dortmund,Borussia Dortmund,GER,1870.38,7,false,false",
                "borussia-dortmund,Borussia Dortmund,GER,1870.38,7,false,true",
            )
            .replace(
                "brest,Brest,FRA,1684.736328,36,false,true",
                "brest,Brest,FRA,1684.736328,36,false,false",
            );
        let err = load_roster(doctored.as_bytes(), "x").unwrap_err();
        match err {
            RosterError::AssociationOverload { association, count } => {
                assert_eq!(association, "GER");
                assert_eq!(count, 5);
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn roster_round_trips_through_csv() {
        let r = roster();
        let mut buf = Vec::new();
        write_roster(&r, &mut buf).unwrap();
        let again = load_roster(buf.as_slice(), "2024-25").unwrap();
        assert_eq!(r.teams, again.teams);
    }

    #[test]
    fn uefa_pots_match_official_2024_25_seeding() {
        let r = roster();
        let pots = assign_pots(&r.teams, Design::New, SeedingPolicy::UefaCoefficient).unwrap();
        let names = |pot: &Vec<usize>| -> Vec<&str> {
            pot.iter().map(|&i| r.teams[i].id.as_str()).collect()
        };
        assert_eq!(
            names(&pots.pots[0]),
            vec![
                "real-madrid",
                "manchester-city",
                "bayern-munich",
                "paris-saint-germain",
                "liverpool",
                "inter-milan",
                "borussia-dortmund",
                "rb-leipzig",
                "barcelona"
            ]
        );
        assert!(names(&pots.pots[1]).contains(&"milan"));
        assert!(names(&pots.pots[3]).contains(&"girona"));
    }

    #[test]
    fn elo_pots_have_no_titleholder_exception() {
        let r = roster();
        let old = old_design_roster(&r);
        let pots = assign_pots(&old, Design::Old, SeedingPolicy::Elo).unwrap();
        let pot1: Vec<&str> = pots.pots[0]
            .iter()
            .map(|&i| old[i].id.as_str())
            .collect();
        assert_eq!(
            pot1,
            vec![
                "manchester-city",
                "real-madrid",
                "inter-milan",
                "arsenal",
                "liverpool",
                "bayer-leverkusen",
                "bayern-munich",
                "barcelona"
            ]
        );
        // PSG is Pot 1 by coefficient but only Pot 2 by rating.
        let pot2: Vec<&str> = pots.pots[1]
            .iter()
            .map(|&i| old[i].id.as_str())
            .collect();
        assert!(pot2.contains(&"paris-saint-germain"));
    }

    #[test]
    fn pots_partition_input() {
        let r = roster();
        for policy in [SeedingPolicy::UefaCoefficient, SeedingPolicy::Elo] {
            let pots = assign_pots(&r.teams, Design::New, policy).unwrap();
            assert_eq!(pots.pots.len(), POT_COUNT);
            assert!(pots.pots.iter().all(|p| p.len() == 9));
            assert!(is_partition(&pots.pots, 36));
        }
        let old = old_design_roster(&r);
        let pots = assign_pots(&old, Design::Old, SeedingPolicy::UefaCoefficient).unwrap();
        assert!(pots.pots.iter().all(|p| p.len() == 8));
        assert!(is_partition(&pots.pots, 32));
        // Titleholder leads Pot 1 under the official policy.
        assert!(old[pots.pots[0][0]].titleholder);
    }

    #[test]
    fn elo_pot_index_is_rank_by_elo() {
        let r = roster();
        let pots = assign_pots(&r.teams, Design::New, SeedingPolicy::Elo).unwrap();
        let mut by_elo: Vec<usize> = (0..36).collect();
        by_elo.sort_by(|&a, &b| r.teams[b].elo.total_cmp(&r.teams[a].elo));
        for (rank, &team) in by_elo.iter().enumerate() {
            let pot = pots.pots.iter().position(|p| p.contains(&team)).unwrap();
            assert_eq!(pot, rank / 9);
        }
    }

    #[test]
    fn wrong_count_for_design_rejected() {
        let r = roster();
        let err = assign_pots(&r.teams, Design::Old, SeedingPolicy::Elo).unwrap_err();
        assert!(matches!(
            err,
            PotError::WrongTeamCount {
                expected: 32,
                found: 36,
                ..
            }
        ));
    }
}
