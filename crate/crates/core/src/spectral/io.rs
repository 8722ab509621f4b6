use super::{Field, SpectralError, Spectrum, TorusGrid};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridJson {
    #[serde(rename = "N")]
    pub dim: usize,
    #[serde(rename = "T")]
    pub period: f64,
    pub n: usize,
}

impl From<&TorusGrid> for GridJson {
    fn from(g: &TorusGrid) -> Self {
        Self {
            dim: g.dim(),
            period: g.period(),
            n: g.n(),
        }
    }
}

impl GridJson {
    pub fn to_grid(&self) -> Result<TorusGrid, SpectralError> {
        TorusGrid::new(self.dim, self.period, self.n)
    }
}

/// On-disk form shared by fields and spectra.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralJson {
    pub grid: GridJson,
    pub kind: String,
    pub data: Vec<Value>,
}

pub fn write_field(f: &Field) -> Value {
    serde_json::to_value(SpectralJson {
        grid: f.grid().into(),
        kind: "field".into(),
        data: f.values().iter().map(|v| Value::from(*v)).collect(),
    })
    .expect("field serializes")
}

pub fn write_spectrum(s: &Spectrum) -> Value {
    serde_json::to_value(SpectralJson {
        grid: s.grid().into(),
        kind: "spectrum".into(),
        data: s
            .coeffs()
            .iter()
            .map(|c| Value::from(vec![c.re, c.im]))
            .collect(),
    })
    .expect("spectrum serializes")
}

fn parse(v: &Value, kind: &str) -> Result<(TorusGrid, Vec<Value>), SpectralError> {
    let doc: SpectralJson =
        serde_json::from_value(v.clone()).map_err(|e| SpectralError::Format(e.to_string()))?;
    if doc.kind != kind {
        return Err(SpectralError::Format(format!(
            "expected kind \"{kind}\", found \"{}\"",
            doc.kind
        )));
    }
    Ok((doc.grid.to_grid()?, doc.data))
}

pub fn read_field(v: &Value) -> Result<Field, SpectralError> {
    let (grid, data) = parse(v, "field")?;
    let values = data
        .iter()
        .enumerate()
        .map(|(i, d)| {
            d.as_f64()
                .ok_or_else(|| SpectralError::Format(format!("data[{i}] is not a number")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Field::new(grid, values)
}

pub fn read_spectrum(v: &Value) -> Result<Spectrum, SpectralError> {
    let (grid, data) = parse(v, "spectrum")?;
    let coeffs = data
        .iter()
        .enumerate()
        .map(|(i, d)| match d.as_array().map(|a| a.as_slice()) {
            Some([re, im]) => match (re.as_f64(), im.as_f64()) {
                (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
                _ => Err(SpectralError::Format(format!("data[{i}] is not numeric"))),
            },
            _ => Err(SpectralError::Format(format!("data[{i}] is not an [re, im] pair"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Spectrum::new(grid, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::forward_transform;

    #[test]
    fn roundtrip_is_exact() {
        let g = TorusGrid::new(2, 1.5, 4).unwrap();
        let f = Field::from_fn(g, |x| (x[0] * 1.7).sin() * (x[1] + 0.3).exp()).unwrap();
        let s = forward_transform(&f);
        let fj = serde_json::to_string(&write_field(&f)).unwrap();
        let sj = serde_json::to_string(&write_spectrum(&s)).unwrap();
        assert_eq!(read_field(&serde_json::from_str(&fj).unwrap()).unwrap(), f);
        assert_eq!(read_spectrum(&serde_json::from_str(&sj).unwrap()).unwrap(), s);
    }

    #[test]
    fn kind_mismatch_is_rejected() {
        let g = TorusGrid::new(1, 1.0, 4).unwrap();
        let v = write_field(&Field::zeros(g));
        assert!(read_spectrum(&v).is_err());
    }
}
