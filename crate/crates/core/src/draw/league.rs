//! New-design league-phase draw.
//!
//! The sequential procedure mirrors the official draw: teams are processed
//! pot by pot, and each processed team receives its remaining opponents as
//! home/away picks per pot, uniformly among the choices that still allow
//! the whole draw to complete. Deadlock detection is exact: a candidate is
//! admitted iff a full valid schedule extends the tentative state, decided
//! by backtracking search rather than an external solver.
//!
//! The search state keeps, for every still-open slot (team, pot, side), an
//! incrementally maintained count of fixtures that could fill it. Commits
//! and undos update the counts in mirrored passes, so the search can pick
//! the most constrained slot and fail fast without rescanning the board.

use rand::Rng;

use super::{DrawError, DrawInstance};

const HOME: usize = 0;
const AWAY: usize = 1;

/// A complete league-phase draw: directed fixtures `(home, away)`, sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeagueSchedule {
    pub fixtures: Vec<(usize, usize)>,
}

/// Opponents drawn for one team from one pot. `home` is the opponent
/// visited by nobody -- the team hosts it; `away` hosts the team. A side
/// is `None` when that slot was already filled by an earlier pick.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OpponentPair {
    pub home: Option<usize>,
    pub away: Option<usize>,
}

/// Partial draw state with per-slot candidate counts.
#[derive(Debug, Clone)]
pub struct DrawState<'i> {
    inst: &'i DrawInstance,
    /// Bit `p` set: the team still needs a home opponent from pot `p`.
    home_open: Vec<u8>,
    /// Bit `p` set: the team still needs an away opponent from pot `p`.
    away_open: Vec<u8>,
    /// Opponents already scheduled (either direction), one bit per team.
    met: Vec<u64>,
    /// Opponents per association, `[team * n_assocs + assoc]`.
    assoc_cnt: Vec<u8>,
    /// Open-slot candidate counts, `[(team * n_pots + pot) * 2 + side]`.
    /// Stale while the slot is closed.
    cnt: Vec<u8>,
    fixtures: Vec<(u8, u8)>,
}

impl<'i> DrawState<'i> {
    pub fn new(inst: &'i DrawInstance) -> Self {
        let n = inst.n_teams;
        let mut state = DrawState {
            inst,
            home_open: vec![(1u8 << inst.n_pots) - 1; n],
            away_open: vec![(1u8 << inst.n_pots) - 1; n],
            met: vec![0; n],
            assoc_cnt: vec![0; n * inst.n_assocs],
            cnt: vec![0; n * inst.n_pots * 2],
            fixtures: Vec::with_capacity(n * inst.n_pots),
        };
        for t in 0..n {
            for p in 0..inst.n_pots {
                let home = inst.pots[p].iter().filter(|&&v| state.allowed(t, v)).count();
                let away = inst.pots[p].iter().filter(|&&v| state.allowed(v, t)).count();
                state.cnt[Self::slot(inst, t, p, HOME)] = home as u8;
                state.cnt[Self::slot(inst, t, p, AWAY)] = away as u8;
            }
        }
        state
    }

    #[inline]
    fn slot(inst: &DrawInstance, team: usize, pot: usize, side: usize) -> usize {
        (team * inst.n_pots + pot) * 2 + side
    }

    pub fn instance(&self) -> &DrawInstance {
        self.inst
    }

    pub fn home_slot_open(&self, team: usize, pot: usize) -> bool {
        self.home_open[team] & (1 << pot) != 0
    }

    pub fn away_slot_open(&self, team: usize, pot: usize) -> bool {
        self.away_open[team] & (1 << pot) != 0
    }

    pub fn is_complete(&self) -> bool {
        self.home_open.iter().all(|&m| m == 0) && self.away_open.iter().all(|&m| m == 0)
    }

    pub fn fixtures(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.fixtures.iter().map(|&(h, a)| (h as usize, a as usize))
    }

    /// Whether the fixture `home` hosts `away` respects every local
    /// constraint in the current state.
    #[inline]
    fn allowed(&self, home: usize, away: usize) -> bool {
        let inst = self.inst;
        let pot_h = inst.pot_of[home] as usize;
        let pot_a = inst.pot_of[away] as usize;
        self.home_open[home] & (1 << pot_a) != 0
            && self.away_open[away] & (1 << pot_h) != 0
            && self.met[home] & (1 << away) == 0
            && inst.assoc_of[home] != inst.assoc_of[away]
            && self.assoc_cnt[home * inst.n_assocs + inst.assoc_of[away] as usize]
                < inst.assoc_cap
            && self.assoc_cnt[away * inst.n_assocs + inst.assoc_of[home] as usize]
                < inst.assoc_cap
    }

    #[inline]
    fn dec(&mut self, team: usize, pot: usize, side: usize) {
        self.cnt[Self::slot(self.inst, team, pot, side)] -= 1;
    }

    #[inline]
    fn inc(&mut self, team: usize, pot: usize, side: usize) {
        self.cnt[Self::slot(self.inst, team, pot, side)] += 1;
    }

    /// Commits a fixture, updating the candidate counts of every slot the
    /// new constraints touch. Each sub-step removes exactly the fixtures
    /// that were allowed before it and are blocked after it.
    fn commit(&mut self, home: usize, away: usize) {
        debug_assert!(self.allowed(home, away));
        let inst = self.inst;
        let pot_h = inst.pot_of[home] as usize;
        let pot_a = inst.pot_of[away] as usize;
        let assoc_h = inst.assoc_of[home] as usize;
        let assoc_a = inst.assoc_of[away] as usize;

        // The reverse pairing dies with this one.
        if self.allowed(away, home) {
            self.dec(away, pot_h, HOME);
            self.dec(home, pot_a, AWAY);
        }
        self.met[home] |= 1 << away;
        self.met[away] |= 1 << home;

        // Home side no longer hosts anyone from the away side's pot.
        for &v in &inst.pots[pot_a] {
            if self.allowed(home, v) {
                self.dec(v, pot_h, AWAY);
            }
        }
        self.home_open[home] &= !(1 << pot_a);

        // Away side no longer visits anyone from the home side's pot.
        for &u in &inst.pots[pot_h] {
            if self.allowed(u, away) {
                self.dec(u, pot_a, HOME);
            }
        }
        self.away_open[away] &= !(1 << pot_h);

        // Association caps; fixtures with that association die when the
        // counter reaches the cap.
        let c = self.assoc_cnt[home * inst.n_assocs + assoc_a];
        if c + 1 == inst.assoc_cap {
            for &w in &inst.assoc_members[assoc_a] {
                if self.allowed(home, w) {
                    self.dec(home, inst.pot_of[w] as usize, HOME);
                    self.dec(w, pot_h, AWAY);
                }
                if self.allowed(w, home) {
                    self.dec(w, pot_h, HOME);
                    self.dec(home, inst.pot_of[w] as usize, AWAY);
                }
            }
        }
        self.assoc_cnt[home * inst.n_assocs + assoc_a] = c + 1;

        let c = self.assoc_cnt[away * inst.n_assocs + assoc_h];
        if c + 1 == inst.assoc_cap {
            for &w in &inst.assoc_members[assoc_h] {
                if self.allowed(away, w) {
                    self.dec(away, inst.pot_of[w] as usize, HOME);
                    self.dec(w, pot_a, AWAY);
                }
                if self.allowed(w, away) {
                    self.dec(w, pot_a, HOME);
                    self.dec(away, inst.pot_of[w] as usize, AWAY);
                }
            }
        }
        self.assoc_cnt[away * inst.n_assocs + assoc_h] = c + 1;

        self.fixtures.push((home as u8, away as u8));
    }

    /// Reverts the most recent commit, mirroring its sub-steps in reverse
    /// order; reopened slots get their counts recomputed.
    fn undo_last(&mut self) {
        let (home, away) = self.fixtures.pop().expect("no fixture to undo");
        let (home, away) = (home as usize, away as usize);
        let inst = self.inst;
        let pot_h = inst.pot_of[home] as usize;
        let pot_a = inst.pot_of[away] as usize;
        let assoc_h = inst.assoc_of[home] as usize;
        let assoc_a = inst.assoc_of[away] as usize;

        let c = self.assoc_cnt[away * inst.n_assocs + assoc_h];
        self.assoc_cnt[away * inst.n_assocs + assoc_h] = c - 1;
        if c == inst.assoc_cap {
            for &w in &inst.assoc_members[assoc_h] {
                if self.allowed(away, w) {
                    self.inc(away, inst.pot_of[w] as usize, HOME);
                    self.inc(w, pot_a, AWAY);
                }
                if self.allowed(w, away) {
                    self.inc(w, pot_a, HOME);
                    self.inc(away, inst.pot_of[w] as usize, AWAY);
                }
            }
        }

        let c = self.assoc_cnt[home * inst.n_assocs + assoc_a];
        self.assoc_cnt[home * inst.n_assocs + assoc_a] = c - 1;
        if c == inst.assoc_cap {
            for &w in &inst.assoc_members[assoc_a] {
                if self.allowed(home, w) {
                    self.inc(home, inst.pot_of[w] as usize, HOME);
                    self.inc(w, pot_h, AWAY);
                }
                if self.allowed(w, home) {
                    self.inc(w, pot_h, HOME);
                    self.inc(home, inst.pot_of[w] as usize, AWAY);
                }
            }
        }

        self.away_open[away] |= 1 << pot_h;
        let mut k = 0u8;
        for &u in &inst.pots[pot_h] {
            if self.allowed(u, away) {
                self.inc(u, pot_a, HOME);
                k += 1;
            }
        }
        self.cnt[Self::slot(inst, away, pot_h, AWAY)] = k;

        self.home_open[home] |= 1 << pot_a;
        let mut k = 0u8;
        for &v in &inst.pots[pot_a] {
            if self.allowed(home, v) {
                self.inc(v, pot_h, AWAY);
                k += 1;
            }
        }
        self.cnt[Self::slot(inst, home, pot_a, HOME)] = k;

        self.met[home] &= !(1 << away);
        self.met[away] &= !(1 << home);
        if self.allowed(away, home) {
            self.inc(away, pot_h, HOME);
            self.inc(home, pot_a, AWAY);
        }
    }

    /// Open slot with the fewest candidates, or `None` when the draw is
    /// complete. Returns early on a dead slot.
    fn most_constrained_slot(&self) -> Option<(usize, usize, usize, u8)> {
        let inst = self.inst;
        let mut best: Option<(usize, usize, usize, u8)> = None;
        for t in 0..inst.n_teams {
            let open = [self.home_open[t], self.away_open[t]];
            for side in [HOME, AWAY] {
                let mut mask = open[side];
                while mask != 0 {
                    let p = mask.trailing_zeros() as usize;
                    mask &= mask - 1;
                    let c = self.cnt[Self::slot(inst, t, p, side)];
                    if c == 0 {
                        return Some((t, p, side, 0));
                    }
                    if best.map_or(true, |(.., bc)| c < bc) {
                        best = Some((t, p, side, c));
                    }
                }
            }
        }
        best
    }

    /// Exact completion test; leaves the state as it found it.
    fn completion_exists(&mut self) -> bool {
        let Some((team, pot, side, c)) = self.most_constrained_slot() else {
            return true;
        };
        if c == 0 {
            return false;
        }
        let inst = self.inst;
        for &v in &inst.pots[pot] {
            let (h, a) = if side == HOME { (team, v) } else { (v, team) };
            if self.allowed(h, a) {
                self.commit(h, a);
                let ok = self.completion_exists();
                self.undo_last();
                if ok {
                    return true;
                }
            }
        }
        false
    }

    /// Applies a fixture after checking it against the local constraints.
    /// Intended for reconstructing partial states; the draw itself goes
    /// through the internal fast path.
    pub fn try_apply_fixture(&mut self, home: usize, away: usize) -> Result<(), DrawError> {
        if home >= self.inst.n_teams || away >= self.inst.n_teams || !self.allowed(home, away) {
            return Err(DrawError::InvalidFixture {
                home: self
                    .inst
                    .team_labels
                    .get(home)
                    .cloned()
                    .unwrap_or_else(|| format!("#{home}")),
                away: self
                    .inst
                    .team_labels
                    .get(away)
                    .cloned()
                    .unwrap_or_else(|| format!("#{away}")),
                reason: "a local draw constraint forbids this pairing".into(),
            });
        }
        self.commit(home, away);
        Ok(())
    }

    /// Joint local validity of one home/away pick for `team` from pot `p`.
    fn pair_locally_valid(&self, team: usize, host: usize, visitor_host: usize) -> bool {
        // `host` is hosted by the team; `visitor_host` hosts the team.
        if host == visitor_host {
            return false;
        }
        if !self.allowed(team, host) || !self.allowed(visitor_host, team) {
            return false;
        }
        let inst = self.inst;
        let (ah, av) = (inst.assoc_of[host], inst.assoc_of[visitor_host]);
        // Both picks count against the team's cap for a shared association.
        ah != av
            || self.assoc_cnt[team * inst.n_assocs + ah as usize] + 2 <= inst.assoc_cap
    }

    #[cfg(test)]
    pub(crate) fn assert_counts_consistent(&self) {
        let inst = self.inst;
        for t in 0..inst.n_teams {
            for p in 0..inst.n_pots {
                if self.home_slot_open(t, p) {
                    let real = inst.pots[p].iter().filter(|&&v| self.allowed(t, v)).count();
                    assert_eq!(
                        self.cnt[Self::slot(inst, t, p, HOME)] as usize,
                        real,
                        "home count of team {t} pot {p}"
                    );
                }
                if self.away_slot_open(t, p) {
                    let real = inst.pots[p].iter().filter(|&&v| self.allowed(v, t)).count();
                    assert_eq!(
                        self.cnt[Self::slot(inst, t, p, AWAY)] as usize,
                        real,
                        "away count of team {t} pot {p}"
                    );
                }
            }
        }
    }
}

/// Exact feasibility of a partial draw: true iff at least one complete
/// valid schedule extends it.
pub fn check_completion_feasible(state: &DrawState) -> bool {
    state.clone().completion_exists()
}

/// All opponent picks for `team` from pot `pot` that pass the local
/// constraints and keep the draw completable. Covers the open slots only:
/// both sides, or a single side when the other is already filled.
pub fn enumerate_candidate_pairs(state: &DrawState, team: usize, pot: usize) -> Vec<OpponentPair> {
    let mut scratch = state.clone();
    let inst = scratch.inst;
    let mut result = Vec::new();
    let home_open = scratch.home_slot_open(team, pot);
    let away_open = scratch.away_slot_open(team, pot);
    match (home_open, away_open) {
        (true, true) => {
            for &h in &inst.pots[pot] {
                for &a in &inst.pots[pot] {
                    if scratch.pair_locally_valid(team, h, a) {
                        scratch.commit(team, h);
                        scratch.commit(a, team);
                        if scratch.completion_exists() {
                            result.push(OpponentPair {
                                home: Some(h),
                                away: Some(a),
                            });
                        }
                        scratch.undo_last();
                        scratch.undo_last();
                    }
                }
            }
        }
        (true, false) => {
            for &h in &inst.pots[pot] {
                if scratch.allowed(team, h) {
                    scratch.commit(team, h);
                    if scratch.completion_exists() {
                        result.push(OpponentPair {
                            home: Some(h),
                            away: None,
                        });
                    }
                    scratch.undo_last();
                }
            }
        }
        (false, true) => {
            for &a in &inst.pots[pot] {
                if scratch.allowed(a, team) {
                    scratch.commit(a, team);
                    if scratch.completion_exists() {
                        result.push(OpponentPair {
                            home: None,
                            away: Some(a),
                        });
                    }
                    scratch.undo_last();
                }
            }
        }
        (false, false) => {}
    }
    result
}

/// Runs the sequential league-phase draw and returns a complete schedule.
///
/// The selected pick is uniform over the feasible candidates of each slot.
/// Rather than testing every candidate up front, candidates are drawn
/// without replacement from the locally valid set and checked lazily; the
/// first feasible hit is kept, which yields the same distribution with far
/// fewer completion searches.
pub fn draw_league(inst: &DrawInstance, rng: &mut impl Rng) -> Result<LeagueSchedule, DrawError> {
    let mut state = DrawState::new(inst);
    if !state.completion_exists() {
        return Err(DrawError::Infeasible);
    }
    for pot in 0..inst.n_pots {
        let mut pending = inst.pots[pot].clone();
        while !pending.is_empty() {
            let team = pending.swap_remove(rng.gen_range(0..pending.len()));
            for p in 0..inst.n_pots {
                fill_pot_slots(&mut state, team, p, rng)?;
            }
        }
    }
    debug_assert!(state.is_complete());
    let mut fixtures: Vec<(usize, usize)> = state.fixtures().collect();
    fixtures.sort_unstable();
    Ok(LeagueSchedule { fixtures })
}

fn fill_pot_slots(
    state: &mut DrawState,
    team: usize,
    pot: usize,
    rng: &mut impl Rng,
) -> Result<(), DrawError> {
    let inst = state.inst;
    let home_open = state.home_slot_open(team, pot);
    let away_open = state.away_slot_open(team, pot);
    match (home_open, away_open) {
        (false, false) => Ok(()),
        (true, true) => {
            let mut cands: Vec<(usize, usize)> = Vec::new();
            for &h in &inst.pots[pot] {
                for &a in &inst.pots[pot] {
                    if state.pair_locally_valid(team, h, a) {
                        cands.push((h, a));
                    }
                }
            }
            loop {
                if cands.is_empty() {
                    return Err(deadlock(inst, team, pot));
                }
                let (h, a) = cands.swap_remove(rng.gen_range(0..cands.len()));
                state.commit(team, h);
                debug_assert!(state.allowed(a, team));
                state.commit(a, team);
                if state.completion_exists() {
                    return Ok(());
                }
                state.undo_last();
                state.undo_last();
            }
        }
        (true, false) => {
            let mut cands: Vec<usize> = inst.pots[pot]
                .iter()
                .copied()
                .filter(|&h| state.allowed(team, h))
                .collect();
            loop {
                if cands.is_empty() {
                    return Err(deadlock(inst, team, pot));
                }
                let h = cands.swap_remove(rng.gen_range(0..cands.len()));
                state.commit(team, h);
                if state.completion_exists() {
                    return Ok(());
                }
                state.undo_last();
            }
        }
        (false, true) => {
            let mut cands: Vec<usize> = inst.pots[pot]
                .iter()
                .copied()
                .filter(|&a| state.allowed(a, team))
                .collect();
            loop {
                if cands.is_empty() {
                    return Err(deadlock(inst, team, pot));
                }
                let a = cands.swap_remove(rng.gen_range(0..cands.len()));
                state.commit(a, team);
                if state.completion_exists() {
                    return Ok(());
                }
                state.undo_last();
            }
        }
    }
}

/// The sequential procedure only commits picks that keep the draw
/// completable, so running out of candidates indicates a bug.
fn deadlock(inst: &DrawInstance, team: usize, pot: usize) -> DrawError {
    debug_assert!(false, "deadlock reached for a feasible state");
    DrawError::BadInstance(format!(
        "internal error: no feasible pick left for {} from pot {}",
        inst.team_label(team),
        pot + 1
    ))
}
