use std::collections::BTreeSet;

use super::{M3Counters, WitnessRecord};
use crate::assignment::MessageAssignment;
use crate::error::{Error, Result};

/// Incrementally grown transmitter set with its carried-message count.
struct Growth<'a> {
    assignment: &'a MessageAssignment,
    per_tx: Vec<BTreeSet<usize>>,
    chosen: Vec<bool>,
    covered: Vec<bool>,
    size: usize,
    covered_count: usize,
}

impl<'a> Growth<'a> {
    fn new(assignment: &'a MessageAssignment) -> Self {
        let k = assignment.users();
        Self {
            assignment,
            per_tx: assignment.messages_per_transmitter(),
            chosen: vec![false; k + 1],
            covered: vec![false; k + 1],
            size: 0,
            covered_count: 0,
        }
    }

    fn users(&self) -> usize {
        self.assignment.users()
    }

    /// Unchosen transmitter adding the fewest new messages; smallest index on ties.
    fn cheapest(&self) -> Option<(usize, usize)> {
        (1..=self.users())
            .filter(|&j| !self.chosen[j])
            .map(|j| (j, self.per_tx[j - 1].iter().filter(|&&i| !self.covered[i]).count()))
            .min_by_key(|&(j, added)| (added, j))
    }

    /// Adds the cheapest transmitter, failing if it would exceed `budget` messages.
    fn extend_within(&mut self, budget: usize, stage: &str) -> Result<()> {
        let (tx, added) = self
            .cheapest()
            .ok_or_else(|| Error::InternalInvariant("no transmitter left to add".into()))?;
        if self.covered_count + added > budget {
            return Err(Error::InternalInvariant(format!(
                "{stage}: best extension reaches {} carried messages, budget {budget}",
                self.covered_count + added
            )));
        }
        self.chosen[tx] = true;
        self.size += 1;
        for &i in &self.per_tx[tx - 1] {
            if !self.covered[i] {
                self.covered[i] = true;
                self.covered_count += 1;
            }
        }
        Ok(())
    }

    /// Pigeonhole seed: one transmitter carrying at most `M` messages.
    fn seed(&mut self, cooperation: usize) -> Result<()> {
        self.extend_within(cooperation, "pigeonhole seed")
    }

    /// Grows from `n` to `target` transmitters keeping `|C_S| <= (M-1)|S| + 1`.
    fn grow_linear(&mut self, cooperation: usize, target: usize) -> Result<()> {
        let m = cooperation as i64;
        let k = self.users() as i64;
        while self.size < target {
            let n = self.size as i64;
            let budget = (m - 1) * (n + 1) + 1;
            if k > budget {
                // Pigeonhole progress certificate; guaranteed whenever
                // |C_A| <= (M-1)n + 1 and K >= (M-1)(n+1) + 1.
                let c = self.covered_count as i64;
                if m * (k - c) >= (k - n) * (budget + 1 - c) {
                    return Err(Error::InternalInvariant(format!(
                        "progress inequality fails at n={n}, |C_A|={c}"
                    )));
                }
            }
            self.extend_within(budget as usize, "linear extension")?;
        }
        Ok(())
    }

    /// Cooperation order 3, second phase: from `n >= x1` keep
    /// `|C_S| <= n + x1 + 1` while growing to `target`.
    fn grow_order3(&mut self, x1: usize, target: usize) -> Result<()> {
        let k = self.users() as i64;
        let x1 = x1 as i64;
        while self.size < target {
            let n = self.size as i64;
            let budget = n + x1 + 2;
            if k > budget {
                let c = self.covered_count as i64;
                if 3 * (k - c) >= (k - n) * (n + x1 + 3 - c) {
                    return Err(Error::InternalInvariant(format!(
                        "order-3 progress inequality fails at n={n}, |C_A|={c}"
                    )));
                }
            }
            self.extend_within(budget as usize, "order-3 extension")?;
        }
        Ok(())
    }

    fn record(&self, counters: Option<M3Counters>) -> WitnessRecord {
        let transmitters: BTreeSet<usize> = (1..=self.users()).filter(|&j| self.chosen[j]).collect();
        let carried = self.assignment.carried_messages(&transmitters);
        debug_assert_eq!(carried.len(), self.covered_count);
        WitnessRecord {
            transmitters,
            carried,
            counters,
        }
    }
}

fn check_order(assignment: &MessageAssignment, cooperation: usize) -> Result<()> {
    let order = assignment.cooperation_order();
    if order > cooperation {
        return Err(Error::Infeasible(format!(
            "assignment has cooperation order {order} > {cooperation}"
        )));
    }
    Ok(())
}

/// Builds `S` with `|S| = (K-1)/M` and `|C_S| <= (M-1)|S| + 1 = K - |S|`:
/// a pigeonhole seed followed by greedy extensions, each checked against its
/// counting budget.
pub fn greedy_witness(assignment: &MessageAssignment, cooperation: usize) -> Result<WitnessRecord> {
    let k = assignment.users();
    if cooperation < 2 {
        return Err(Error::InvalidM {
            m: cooperation,
            reason: "witness construction needs M >= 2".into(),
        });
    }
    check_order(assignment, cooperation)?;
    if !(k - 1).is_multiple_of(cooperation) {
        return Err(Error::Infeasible(format!(
            "(K-1)/M = {}/{cooperation} is not an integer; pad K upward",
            k - 1
        )));
    }
    let target = (k - 1) / cooperation;
    let mut growth = Growth::new(assignment);
    if target > 0 {
        growth.seed(cooperation)?;
        growth.grow_linear(cooperation, target)?;
    }
    let record = growth.record(None);
    if record.carried.len() > k - record.transmitters.len() {
        return Err(Error::InternalInvariant("witness exceeds K - |S|".into()));
    }
    Ok(record)
}

/// Cooperation order 3 witness for `K` with `(K+1)/4` even: `|S| = x1 + x2`
/// and `|C_S| <= x3 = 5(K+1)/8`, where `x1 = (K+1)/4`, `x2 = (K-7)/8`.
pub fn m3_witness(assignment: &MessageAssignment) -> Result<WitnessRecord> {
    let k = assignment.users();
    check_order(assignment, 3)?;
    if !(k + 1).is_multiple_of(8) {
        return Err(Error::InvalidK {
            k,
            reason: "(K+1)/4 must be an even positive integer".into(),
        });
    }
    let x1 = (k + 1) / 4;
    let x2 = (k - 7) / 8;
    let x3 = 2 * x1 + 1 + x2;
    if x3 != k - (x1 + x2) {
        return Err(Error::InternalInvariant("x3 != K - (x1 + x2)".into()));
    }
    let mut growth = Growth::new(assignment);
    growth.seed(3)?;
    growth.grow_linear(3, x1)?;
    growth.grow_order3(x1, x1 + x2)?;
    let record = growth.record(Some(M3Counters { x1, x2, x3 }));
    if record.carried.len() > x3 {
        return Err(Error::InternalInvariant(format!(
            "|C_S| = {} exceeds x3 = {x3}",
            record.carried.len()
        )));
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assignment::spiral_assign;

    #[test]
    fn k3_m2_single_transmitter() {
        let a = spiral_assign(3, 2).unwrap();
        let w = greedy_witness(&a, 2).unwrap();
        assert_eq!(w.transmitters.len(), 1);
        assert!(w.carried.len() <= 2);
    }

    #[test]
    fn k5_m2_two_transmitters() {
        let a = spiral_assign(5, 2).unwrap();
        let w = greedy_witness(&a, 2).unwrap();
        assert_eq!(w.transmitters.len(), 2);
        assert!(w.carried.len() <= 3);
        assert_eq!(w.carried, a.carried_messages(&w.transmitters));
    }

    #[test]
    fn preconditions() {
        let a = spiral_assign(6, 2).unwrap();
        assert!(matches!(greedy_witness(&a, 2), Err(Error::Infeasible(_))));
        let a = spiral_assign(5, 3).unwrap();
        assert!(matches!(greedy_witness(&a, 2), Err(Error::Infeasible(_))));
        assert!(matches!(greedy_witness(&a, 1), Err(Error::InvalidM { .. })));
        let a = spiral_assign(11, 3).unwrap();
        assert!(matches!(m3_witness(&a), Err(Error::InvalidK { .. })));
    }

    #[test]
    fn m3_counters() {
        let a = spiral_assign(15, 3).unwrap();
        let w = m3_witness(&a).unwrap();
        assert_eq!(w.counters, Some(M3Counters { x1: 4, x2: 1, x3: 10 }));
        assert_eq!(w.transmitters.len(), 5);
        assert!(w.carried.len() <= 10);

        let a = spiral_assign(7, 3).unwrap();
        let w = m3_witness(&a).unwrap();
        assert_eq!(w.counters, Some(M3Counters { x1: 2, x2: 0, x3: 5 }));
        assert_eq!(w.transmitters.len(), 2);
        assert!(w.carried.len() <= 5);
    }
}
