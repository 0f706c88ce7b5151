//! Python bindings: `import buchi_det`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use buchi_det::nba::parse_nba;
use buchi_det::oracle::{nba_accepts_lasso, split_tree_levels};
use buchi_det::parity::parse_dpa;
use buchi_det::safra::{safra_to_slice, slice_to_safra};
use buchi_det::slice::RankTree;
use buchi_det::{DeterminizeOptions, Lasso, MergeStrategy, StateId};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn lasso(text: &str) -> PyResult<Lasso> {
    text.parse().map_err(value_err)
}

#[pyclass(name = "BuchiAutomaton", frozen)]
struct PyBuchi(buchi_det::BuchiAutomaton);

#[pymethods]
impl PyBuchi {
    /// Parses `.nba` text.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        parse_nba(text).map(PyBuchi).map_err(value_err)
    }

    #[getter]
    fn num_states(&self) -> usize {
        self.0.num_states()
    }

    #[getter]
    fn alphabet(&self) -> Vec<String> {
        self.0.alphabet().to_vec()
    }

    fn to_text(&self) -> String {
        self.0.to_nba_string()
    }

    /// Membership of a lasso such as `"a | b a"`.
    fn accepts(&self, word: &str) -> PyResult<bool> {
        let v = nba_accepts_lasso(&self.0, &lasso(word)?).map_err(value_err)?;
        Ok(v.accepted)
    }

    #[pyo3(signature = (strategy = "safra", cap = 1_000_000, compact = false))]
    fn determinize(&self, strategy: &str, cap: usize, compact: bool) -> PyResult<PyParity> {
        let strategy: MergeStrategy = strategy.parse().map_err(PyValueError::new_err)?;
        let opts = DeterminizeOptions {
            cap,
            compact_priorities: compact,
            ..Default::default()
        };
        buchi_det::determinize::determinize_with(&self.0, strategy, &opts)
            .map(PyParity)
            .map_err(value_err)
    }

    /// Reduced split-tree levels along a finite word, as lists of state lists.
    fn split_tree_levels(&self, prefix: Vec<String>) -> PyResult<Vec<Vec<Vec<u32>>>> {
        let idx = prefix
            .iter()
            .map(|s| self.0.symbol_index(s))
            .collect::<buchi_det::Result<Vec<_>>>()
            .map_err(value_err)?;
        Ok(split_tree_levels(&self.0, &idx)
            .into_iter()
            .map(|l| {
                l.0.iter()
                    .map(|s| s.iter().map(|q| q.0).collect())
                    .collect()
            })
            .collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "BuchiAutomaton(states={}, alphabet={:?})",
            self.0.num_states(),
            self.0.alphabet()
        )
    }
}

#[pyclass(name = "ParityAutomaton", frozen)]
struct PyParity(buchi_det::ParityAutomaton);

#[pymethods]
impl PyParity {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        parse_dpa(text).map(PyParity).map_err(value_err)
    }

    #[getter]
    fn num_states(&self) -> usize {
        self.0.num_states()
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.0.num_edges()
    }

    fn label(&self, state: usize) -> Option<String> {
        self.0.label(state).map(str::to_string)
    }

    #[pyo3(signature = (labels = true))]
    fn to_text(&self, labels: bool) -> String {
        if labels {
            self.0.to_dpa_string()
        } else {
            self.0.without_labels().to_dpa_string()
        }
    }

    /// Returns `(accepted, min_priority, cycle_states)`.
    fn run_lasso(&self, word: &str) -> PyResult<(bool, u32, Vec<usize>)> {
        let r = self.0.run_lasso(&lasso(word)?).map_err(value_err)?;
        Ok((r.accepted, r.min_priority, r.cycle_states))
    }

    fn accepts(&self, word: &str) -> PyResult<bool> {
        self.0.accepts(&lasso(word)?).map_err(value_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "ParityAutomaton(states={}, edges={})",
            self.0.num_states(),
            self.0.num_edges()
        )
    }
}

#[pyclass(name = "RankedSlice", frozen, eq, hash)]
#[derive(PartialEq, Eq, Hash)]
struct PySlice(buchi_det::RankedSlice);

#[pymethods]
impl PySlice {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        text.parse().map(PySlice).map_err(value_err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("RankedSlice('{}')", self.0)
    }

    #[getter]
    fn ranks(&self) -> Vec<u32> {
        self.0.ranks().to_vec()
    }

    #[getter]
    fn sets(&self) -> Vec<Vec<u32>> {
        self.0
            .sets()
            .iter()
            .map(|s| s.iter().map(|q| q.0).collect())
            .collect()
    }

    fn rank_profile(&self, state: u32) -> PyResult<Vec<u32>> {
        self.0
            .rank_profile(StateId(state))
            .map(|p| p.0)
            .map_err(value_err)
    }

    /// Ranked Safra tree in text form, e.g. `{0}:1({1}:2)`.
    fn to_safra(&self) -> PyResult<String> {
        slice_to_safra(&self.0)
            .map(|t| t.to_string())
            .map_err(value_err)
    }

    #[staticmethod]
    fn from_safra(text: &str) -> PyResult<Self> {
        let tree: buchi_det::RankedSafraTree = text.parse().map_err(value_err)?;
        Ok(PySlice(safra_to_slice(&tree)))
    }
}

#[pymodule]
#[pyo3(name = "buchi_det")]
fn buchi_det_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBuchi>()?;
    m.add_class::<PyParity>()?;
    m.add_class::<PySlice>()?;
    Ok(())
}
