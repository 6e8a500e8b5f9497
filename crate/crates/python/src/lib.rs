use pyo3::prelude::*;

#[pymodule]
fn fairway(_m: &Bound<'_, PyModule>) -> PyResult<()> {
    Ok(())
}
