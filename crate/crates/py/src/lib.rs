//! Python bindings for the radiomx pipeline: volume I/O, feature extraction,
//! feature tables and the trained classification pipeline.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use radiomx::features;
use radiomx::pipeline::{
    self, evaluate_model, report_to_json, train_pipeline, PipelineConfig,
};
use radiomx::roi::BinSpec;
use radiomx::tabular;
use radiomx::volume;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn io_err(e: impl std::fmt::Display) -> PyErr {
    PyIOError::new_err(e.to_string())
}

/// A scalar image volume with physical spacing (mm).
#[pyclass(frozen)]
struct Volume {
    inner: volume::Volume,
}

#[pymethods]
impl Volume {
    /// Read a volume from an NRRD file.
    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: volume::read_volume(path).map_err(io_err)?,
        })
    }

    /// Build a volume from raw data in x-fastest order.
    #[staticmethod]
    fn from_data(
        dims: (usize, usize, usize),
        spacing: (f64, f64, f64),
        data: Vec<f64>,
    ) -> PyResult<Self> {
        Ok(Self {
            inner: volume::Volume::new(dims, spacing, data).map_err(value_err)?,
        })
    }

    fn write(&self, path: &str) -> PyResult<()> {
        volume::write_volume(path, &self.inner).map_err(io_err)
    }

    #[getter]
    fn dims(&self) -> (usize, usize, usize) {
        self.inner.dims()
    }

    #[getter]
    fn spacing(&self) -> (f64, f64, f64) {
        self.inner.spacing()
    }

    #[getter]
    fn data(&self) -> Vec<f64> {
        self.inner.data().to_vec()
    }

    fn __repr__(&self) -> String {
        format!(
            "Volume(dims={:?}, spacing={:?})",
            self.inner.dims(),
            self.inner.spacing()
        )
    }
}

/// An integer label grid sharing a volume's geometry.
#[pyclass(frozen)]
struct MaskVolume {
    inner: volume::MaskVolume,
}

#[pymethods]
impl MaskVolume {
    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: volume::read_mask(path).map_err(io_err)?,
        })
    }

    #[staticmethod]
    fn from_data(
        dims: (usize, usize, usize),
        spacing: (f64, f64, f64),
        labels: Vec<u32>,
    ) -> PyResult<Self> {
        Ok(Self {
            inner: volume::MaskVolume::new(dims, spacing, labels).map_err(value_err)?,
        })
    }

    fn write(&self, path: &str) -> PyResult<()> {
        volume::write_mask(path, &self.inner).map_err(io_err)
    }

    #[getter]
    fn dims(&self) -> (usize, usize, usize) {
        self.inner.dims()
    }

    #[getter]
    fn spacing(&self) -> (f64, f64, f64) {
        self.inner.spacing()
    }

    #[getter]
    fn labels(&self) -> Vec<u32> {
        self.inner.labels().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("MaskVolume(dims={:?})", self.inner.dims())
    }
}

/// Check that image and mask dims/spacing are compatible.
#[pyfunction]
fn validate_geometry(image: &Volume, mask: &MaskVolume) -> PyResult<()> {
    volume::validate_geometry(&image.inner, &mask.inner).map_err(value_err)
}

/// Extract the 120 radiomic features for one case. Returns an ordered dict
/// of feature name -> value.
#[pyfunction]
#[pyo3(signature = (image, mask, label=1, bin_width=25.0))]
fn extract_features<'py>(
    py: Python<'py>,
    image: &Volume,
    mask: &MaskVolume,
    label: u32,
    bin_width: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let fv = features::extract_all(
        &image.inner,
        &mask.inner,
        label,
        BinSpec::FixedWidth { width: bin_width },
    )
    .map_err(value_err)?;
    let dict = PyDict::new(py);
    for (name, value) in fv.names.iter().zip(&fv.values) {
        dict.set_item(name, value)?;
    }
    Ok(dict)
}

/// Cases x features with binary labels (1 = codeleted).
#[pyclass(frozen)]
struct FeatureTable {
    inner: tabular::FeatureTable,
}

#[pymethods]
impl FeatureTable {
    #[staticmethod]
    fn read_csv(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: tabular::FeatureTable::read_csv_path(path).map_err(io_err)?,
        })
    }

    #[staticmethod]
    fn from_rows(
        case_ids: Vec<String>,
        feature_names: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Vec<u8>,
    ) -> PyResult<Self> {
        let n_cols = feature_names.len();
        if rows.len() != case_ids.len() || rows.iter().any(|r| r.len() != n_cols) {
            return Err(PyValueError::new_err(
                "rows must be rectangular: one row per case id, one value per feature",
            ));
        }
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        let matrix = ndarray::Array2::from_shape_vec((case_ids.len(), n_cols), flat)
            .map_err(value_err)?;
        Ok(Self {
            inner: tabular::FeatureTable::new(case_ids, feature_names, matrix, labels)
                .map_err(value_err)?,
        })
    }

    fn write_csv(&self, path: &str) -> PyResult<()> {
        self.inner.write_csv_path(path).map_err(io_err)
    }

    #[getter]
    fn n_rows(&self) -> usize {
        self.inner.n_rows()
    }

    #[getter]
    fn n_features(&self) -> usize {
        self.inner.n_features()
    }

    #[getter]
    fn case_ids(&self) -> Vec<String> {
        self.inner.case_ids.clone()
    }

    #[getter]
    fn feature_names(&self) -> Vec<String> {
        self.inner.feature_names.clone()
    }

    #[getter]
    fn labels(&self) -> Vec<u8> {
        self.inner.labels.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "FeatureTable({} cases x {} features)",
            self.inner.n_rows(),
            self.inner.n_features()
        )
    }
}

/// A fitted scaler + PCA + MLP pipeline.
#[pyclass(frozen)]
struct PipelineModel {
    inner: pipeline::PipelineModel,
}

#[pymethods]
impl PipelineModel {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: pipeline::PipelineModel::load(path).map_err(io_err)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(path).map_err(io_err)
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(value_err)
    }

    /// Apply the stored pipeline: returns (labels, probabilities).
    fn predict(&self, table: &FeatureTable) -> PyResult<(Vec<u8>, Vec<f64>)> {
        self.inner.predict_table(&table.inner).map_err(value_err)
    }

    #[getter]
    fn feature_names(&self) -> Vec<String> {
        self.inner.feature_names.clone()
    }

    #[getter]
    fn pca_k(&self) -> usize {
        self.inner.pca.k
    }

    #[getter]
    fn explained_variance_ratio(&self) -> Vec<f64> {
        self.inner.pca.explained_variance_ratio.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "PipelineModel({} features -> {} components)",
            self.inner.feature_names.len(),
            self.inner.pca.k
        )
    }
}

fn parse_config(config_json: Option<&str>) -> PyResult<PipelineConfig> {
    match config_json {
        None => Ok(PipelineConfig::default()),
        Some(text) => serde_json::from_str(text).map_err(value_err),
    }
}

/// Train the full pipeline (split -> scale -> PCA -> SMOTE -> MLP) on a
/// feature table. `config_json` overrides the defaults; the report is
/// returned as a JSON string.
#[pyfunction]
#[pyo3(signature = (table, config_json=None))]
fn train(table: &FeatureTable, config_json: Option<&str>) -> PyResult<(PipelineModel, String)> {
    let config = parse_config(config_json)?;
    let (model, report) = train_pipeline(&table.inner, &config).map_err(value_err)?;
    Ok((
        PipelineModel { inner: model },
        report_to_json(&report).map_err(value_err)?,
    ))
}

/// Score a feature table with a stored model; returns the report JSON.
#[pyfunction]
fn evaluate(model: &PipelineModel, table: &FeatureTable) -> PyResult<String> {
    let report = evaluate_model(&model.inner, &table.inner).map_err(value_err)?;
    report_to_json(&report).map_err(value_err)
}

#[pymodule]
fn radiomx_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Volume>()?;
    m.add_class::<MaskVolume>()?;
    m.add_class::<FeatureTable>()?;
    m.add_class::<PipelineModel>()?;
    m.add_function(wrap_pyfunction!(validate_geometry, m)?)?;
    m.add_function(wrap_pyfunction!(extract_features, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    Ok(())
}
