use crate::error::{validation, Result};
use crate::statevec::StateVector;

/// Ordered list of pure states sharing one qubit count.
#[derive(Clone, Debug, PartialEq)]
pub struct PureEnsemble {
    n_qubits: usize,
    states: Vec<StateVector>,
}

impl PureEnsemble {
    pub fn new(states: Vec<StateVector>) -> Result<Self> {
        let first = states
            .first()
            .ok_or_else(|| validation("ensemble must contain at least one state"))?;
        let n_qubits = first.n_qubits();
        if let Some((i, s)) = states
            .iter()
            .enumerate()
            .find(|(_, s)| s.n_qubits() != n_qubits)
        {
            return Err(validation(format!(
                "state {i} has {} qubits, expected {n_qubits}",
                s.n_qubits()
            )));
        }
        Ok(Self { n_qubits, states })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn iter(&self) -> std::slice::Iter<'_, StateVector> {
        self.states.iter()
    }

    pub fn into_states(self) -> Vec<StateVector> {
        self.states
    }

    /// Splits into the first `n` states and the rest.
    pub fn split_at(self, n: usize) -> Result<(PureEnsemble, PureEnsemble)> {
        if n == 0 || n >= self.states.len() {
            return Err(validation(format!(
                "cannot split {} states at {n}",
                self.states.len()
            )));
        }
        let mut head = self.states;
        let tail = head.split_off(n);
        Ok((PureEnsemble::new(head)?, PureEnsemble::new(tail)?))
    }
}

impl<'a> IntoIterator for &'a PureEnsemble {
    type Item = &'a StateVector;
    type IntoIter = std::slice::Iter<'a, StateVector>;

    fn into_iter(self) -> Self::IntoIter {
        self.states.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevec::zero_state;

    #[test]
    fn rejects_empty_and_mixed() {
        assert!(PureEnsemble::new(vec![]).is_err());
        let mixed = vec![zero_state(1).unwrap(), zero_state(2).unwrap()];
        assert!(PureEnsemble::new(mixed).is_err());
    }

    #[test]
    fn split() {
        let e = PureEnsemble::new(vec![zero_state(1).unwrap(); 5]).unwrap();
        let (a, b) = e.clone().split_at(2).unwrap();
        assert_eq!((a.len(), b.len()), (2, 3));
        assert!(e.split_at(5).is_err());
    }
}
