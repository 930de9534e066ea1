use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fermicov::covariance::{BoundInstance, BoundPoint};
use fermicov::mspace::{bk_matrix, TreeGraph};
use fermicov::spectral::{CutoffSpec, HermitianMatrix};
use fermicov::torus::DiscreteTorus;
use fermicov::verify::{hermitian_with_spectrum, random_psd, random_tree, GeneratorConfig};
use fermicov::{CMat, CVec, C64};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

/// Everything a run can be configured with; flags override these fields.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub count: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub torus: Option<TorusConfig>,
    pub lambda: Option<LambdaArg>,
    pub eta: Option<Vec<f64>>,
    pub hamiltonian: Option<HamiltonianConfig>,
    pub cutoff: Option<CutoffSpec>,
    pub colors: Option<ColorsConfig>,
    pub points: Option<Vec<PointConfig>>,
    pub generator: Option<GeneratorConfig>,
    pub epsilon: Option<Vec<f64>>,
    pub orders: Option<Vec<usize>>,
    pub ns: Option<Vec<usize>>,
    pub wick: Option<WickConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusConfig {
    pub beta: Option<f64>,
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum LambdaArg {
    Value(f64),
    Named(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum HamiltonianConfig {
    Diagonal { values: Vec<f64> },
    Matrix { re: Vec<Vec<f64>>, im: Option<Vec<Vec<f64>>> },
    Random { dim: usize, scale: f64, seed: Option<u64> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ColorsConfig {
    Explicit { matrix: Vec<Vec<f64>> },
    RandomPsd { m: usize, seed: Option<u64> },
    Tree { m: usize, edges: Vec<(usize, usize, f64)>, t: f64 },
    RandomTree { m: usize, seed: Option<u64>, t: f64 },
}

/// One point of a determinant; `color` is zero-based.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointConfig {
    pub alpha: f64,
    pub phi: Vec<f64>,
    pub phi_im: Option<Vec<f64>>,
    pub color: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WickConfig {
    pub modes: Option<usize>,
    pub order_max: Option<usize>,
    pub scale: Option<f64>,
    pub beta: Option<f64>,
}

pub fn load(path: Option<&Path>) -> Result<ExperimentConfig> {
    let Some(path) = path else {
        return Ok(ExperimentConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("config {}", path.display()))
}

pub fn finite(name: &str, x: f64) -> Result<f64> {
    if !x.is_finite() {
        bail!("{name} = {x} is not finite");
    }
    Ok(x)
}

fn all_finite(name: &str, xs: &[f64]) -> Result<()> {
    for &x in xs {
        finite(name, x)?;
    }
    Ok(())
}

fn rows_to_matrix(name: &str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let r = rows.len();
    if r == 0 || rows.iter().any(|row| row.len() != r) {
        bail!("{name} must be a nonempty square array of rows");
    }
    for row in rows {
        all_finite(name, row)?;
    }
    Ok(DMatrix::from_fn(r, r, |i, j| rows[i][j]))
}

impl LambdaArg {
    pub fn parse(s: &str) -> Result<Self> {
        match s.parse::<f64>() {
            Ok(x) => Ok(LambdaArg::Value(x)),
            Err(_) => Ok(LambdaArg::Named(s.to_string())),
        }
    }

    /// `None` means the singular value `β⁻¹n`.
    pub fn value(&self, torus: &DiscreteTorus) -> Result<f64> {
        match self {
            LambdaArg::Value(x) => finite("lambda", *x),
            LambdaArg::Named(s) if s == "singular" => Ok(torus.inv_step()),
            LambdaArg::Named(s) => bail!("lambda must be a number or \"singular\", got {s:?}"),
        }
    }
}

impl HamiltonianConfig {
    pub fn build(&self, default_seed: u64) -> Result<HermitianMatrix> {
        match self {
            HamiltonianConfig::Diagonal { values } => {
                all_finite("hamiltonian.values", values)?;
                Ok(HermitianMatrix::from_real_diagonal(values)?)
            }
            HamiltonianConfig::Matrix { re, im } => {
                let re = rows_to_matrix("hamiltonian.re", re)?;
                let im = match im {
                    Some(im) => rows_to_matrix("hamiltonian.im", im)?,
                    None => DMatrix::zeros(re.nrows(), re.ncols()),
                };
                if im.shape() != re.shape() {
                    bail!("hamiltonian.im must have the shape of hamiltonian.re");
                }
                let m = CMat::from_fn(re.nrows(), re.ncols(), |i, j| C64::new(re[(i, j)], im[(i, j)]));
                Ok(HermitianMatrix::new(m)?)
            }
            HamiltonianConfig::Random { dim, scale, seed } => {
                finite("hamiltonian.scale", *scale)?;
                if *dim == 0 {
                    bail!("hamiltonian.dim must be positive");
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(default_seed));
                let eig: Vec<f64> = (0..*dim)
                    .map(|_| scale * (2.0 * rand::Rng::random::<f64>(&mut rng) - 1.0))
                    .collect();
                Ok(hermitian_with_spectrum(&mut rng, &eig)?)
            }
        }
    }
}

impl ColorsConfig {
    pub fn build(&self, default_seed: u64) -> Result<DMatrix<f64>> {
        match self {
            ColorsConfig::Explicit { matrix } => rows_to_matrix("colors.matrix", matrix),
            ColorsConfig::RandomPsd { m, seed } => {
                if *m == 0 {
                    bail!("colors.m must be positive");
                }
                Ok(random_psd(&mut ChaCha8Rng::seed_from_u64(seed.unwrap_or(default_seed)), *m))
            }
            ColorsConfig::Tree { .. } | ColorsConfig::RandomTree { .. } => {
                let (tree, t) = self.tree(default_seed)?.expect("tree variant");
                Ok(bk_matrix(&tree, t)?)
            }
        }
    }

    pub fn tree(&self, default_seed: u64) -> Result<Option<(TreeGraph, f64)>> {
        match self {
            ColorsConfig::Tree { m, edges, t } => {
                all_finite("colors.edges", &edges.iter().map(|e| e.2).collect::<Vec<_>>())?;
                Ok(Some((TreeGraph::new(*m, edges.clone())?, finite("colors.t", *t)?)))
            }
            ColorsConfig::RandomTree { m, seed, t } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(default_seed));
                Ok(Some((random_tree(&mut rng, *m)?, finite("colors.t", *t)?)))
            }
            _ => Ok(None),
        }
    }
}

impl ExperimentConfig {
    pub fn torus(&self, beta: Option<f64>, n: Option<usize>) -> Result<DiscreteTorus> {
        let file = self.torus.as_ref();
        let beta = beta.or(file.and_then(|t| t.beta)).unwrap_or(1.0);
        let n = n.or(file.and_then(|t| t.n)).unwrap_or(8);
        Ok(DiscreteTorus::new(finite("beta", beta)?, n)?)
    }

    pub fn cutoff(&self) -> Result<CutoffSpec> {
        let chi = self.cutoff.clone().unwrap_or(CutoffSpec::One);
        chi.validate()?;
        Ok(chi)
    }

    pub fn generator(&self) -> Result<GeneratorConfig> {
        let g = self.generator.clone().unwrap_or_default();
        g.validate()?;
        Ok(g)
    }

    /// The explicit instance described by the config, if it lists points.
    pub fn explicit_instance(&self, torus: DiscreteTorus, seed: u64) -> Result<Option<BoundInstance>> {
        let Some(points) = &self.points else {
            return Ok(None);
        };
        let Some(ham) = &self.hamiltonian else {
            bail!("points require a [hamiltonian] section");
        };
        let h = ham.build(seed)?;
        let colors = match &self.colors {
            Some(c) => c.build(seed)?,
            None => DMatrix::from_element(1, 1, 1.0),
        };
        let mut pts = Vec::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            all_finite("points.phi", &p.phi)?;
            let im = p.phi_im.clone().unwrap_or_else(|| vec![0.0; p.phi.len()]);
            all_finite("points.phi_im", &im)?;
            if im.len() != p.phi.len() {
                bail!("points[{i}]: phi_im must match phi in length");
            }
            let phi = CVec::from_iterator(p.phi.len(), p.phi.iter().zip(&im).map(|(&r, &i)| C64::new(r, i)));
            let alpha = torus
                .point_at(finite("points.alpha", p.alpha)?)
                .with_context(|| format!("points[{i}]"))?;
            pts.push(BoundPoint { alpha, phi, color: p.color });
        }
        Ok(Some(BoundInstance::new(h, torus, self.cutoff()?, colors, pts)?))
    }
}
