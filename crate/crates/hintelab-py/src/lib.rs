//! Python bindings: a `Checker` class holding a live session, so scripts can
//! be fed incrementally, plus a one-shot `check_script` helper.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use hintelab::front::{render, Flags, Session};
use hintelab::kernel::DEFAULT_FUEL;

/// A persistent checking session. Commands executed later see every
/// declaration, hint, and notation introduced earlier.
#[pyclass(unsendable)]
struct Checker {
    session: Session,
}

impl Checker {
    /// Run one source fragment and return (exit_code, output produced by it).
    fn feed(&mut self, src: &str) -> (i32, String) {
        let before = self.session.output.len();
        let code = self.session.run_script(src);
        (code, self.session.output[before..].to_string())
    }
}

#[pymethods]
impl Checker {
    #[new]
    #[pyo3(signature = (trace = false, max_hint_depth = 8, fuel = DEFAULT_FUEL, obligations_fail = false, keep_going = false))]
    fn new(
        trace: bool,
        max_hint_depth: usize,
        fuel: u64,
        obligations_fail: bool,
        keep_going: bool,
    ) -> Self {
        Checker {
            session: Session::new(Flags {
                trace,
                max_hint_depth,
                fuel,
                obligations_fail,
                keep_going,
            }),
        }
    }

    /// Execute a script fragment; returns (exit_code, output).
    fn run_script(&mut self, src: &str) -> (i32, String) {
        self.feed(src)
    }

    /// Elaborate `term` against `expected`; returns the output block.
    /// Raises ValueError when elaboration fails.
    fn check(&mut self, term: &str, expected: &str) -> PyResult<String> {
        let (code, out) = self.feed(&format!("check {term} : {expected}\n"));
        if code == 0 {
            Ok(out)
        } else {
            Err(PyValueError::new_err(out))
        }
    }

    /// Elaborate `term` and infer its type; returns the output block.
    fn infer(&mut self, term: &str) -> PyResult<String> {
        let (code, out) = self.feed(&format!("infer {term}\n"));
        if code == 0 {
            Ok(out)
        } else {
            Err(PyValueError::new_err(out))
        }
    }

    /// The current statement of a named conjecture, rendered, or None.
    fn goal(&self, name: &str) -> Option<String> {
        self.session
            .goal(name)
            .map(|t| render(&self.session.env, &self.session.notation, t))
    }

    /// Render the hint database.
    fn dump_hints(&mut self) -> String {
        let before = self.session.output.len();
        self.session.dump_hints();
        self.session.output[before..].to_string()
    }

    /// Render the registered uniform coercions.
    fn dump_coercions(&mut self) -> String {
        let before = self.session.output.len();
        self.session.dump_coercions();
        self.session.output[before..].to_string()
    }

    /// Everything printed so far.
    #[getter]
    fn output(&self) -> String {
        self.session.output.clone()
    }

    /// Unification trace lines collected so far (empty unless trace=True).
    #[getter]
    fn trace(&self) -> String {
        self.session.trace_output.clone()
    }
}

/// Run a whole script in a fresh session; returns (exit_code, output).
#[pyfunction]
fn check_script(src: &str) -> (i32, String) {
    let mut session = Session::new(Flags::default());
    let code = session.run_script(src);
    (code, session.output)
}

#[pymodule]
fn hintelab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Checker>()?;
    m.add_function(wrap_pyfunction!(check_script, m)?)?;
    Ok(())
}
