//! Settings resolution: command-line flags, then the config file, then defaults.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use memclust::clustering::{BipolarVector, CircuitConfig};
use memclust::crossbar::CrossbarParams;
use memclust::data::{self, ImageSet};
use memclust::device::DeviceParams;
use serde::{Deserialize, Serialize};

use crate::args::{CircuitArgs, DataArgs, EngineKind};

/// Keys accepted in a `--config` TOML file. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub input: Option<PathBuf>,
    pub synthetic: Option<String>,
    pub crop: Option<String>,
    pub take: Option<usize>,
    pub sample: Option<bool>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub clusters: Option<usize>,
    pub epochs: Option<usize>,
    pub alpha: Option<f64>,
    pub engine: Option<EngineKind>,
    pub shuffle: Option<bool>,
    pub levels: Option<u32>,
    pub noise_std: Option<f64>,
    pub pulse_noise_std: Option<f64>,
    pub circuit_input: Option<PathBuf>,
    pub k: Option<usize>,
    pub restarts: Option<usize>,
    pub max_iters: Option<usize>,
    pub tolerance: Option<f64>,
    pub device: Option<DeviceParams>,
    pub crossbar: Option<CrossbarParams>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SyntheticSpec {
    pub k: usize,
    pub per_cluster: usize,
    pub dim: usize,
    pub flip_prob: f64,
}

impl SyntheticSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [k, per, dim, flip] = parts[..] else {
            bail!("--synthetic expects K,PER,DIM,FLIP, got {s:?}");
        };
        Ok(Self {
            k: k.parse().context("synthetic K")?,
            per_cluster: per.parse().context("synthetic PER")?,
            dim: dim.parse().context("synthetic DIM")?,
            flip_prob: flip.parse().context("synthetic FLIP")?,
        })
    }
}

pub fn parse_crop(s: &str) -> Result<(usize, usize)> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .with_context(|| format!("crop must look like WxH, got {s:?}"))?;
    Ok((w.trim().parse().context("crop width")?, h.trim().parse().context("crop height")?))
}

/// Resolved data source and preprocessing.
#[derive(Debug, Clone, Serialize)]
pub struct DataSettings {
    pub input: Option<PathBuf>,
    pub synthetic: Option<SyntheticSpec>,
    pub crop: Option<(usize, usize)>,
    pub take: Option<usize>,
    pub sample: bool,
    pub seed: u64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl DataSettings {
    pub fn resolve(args: &DataArgs, file: &FileConfig) -> Result<Self> {
        let input = args.input.clone().or_else(|| file.input.clone());
        let synthetic = args
            .synthetic
            .as_deref()
            .or(file.synthetic.as_deref())
            .map(SyntheticSpec::parse)
            .transpose()?;
        if input.is_some() && synthetic.is_some() {
            bail!("give either an input file or --synthetic, not both");
        }
        if input.is_none() && synthetic.is_none() {
            bail!("no data: pass --input <idx> or --synthetic K,PER,DIM,FLIP");
        }
        Ok(Self {
            input,
            synthetic,
            crop: args.crop.as_deref().or(file.crop.as_deref()).map(parse_crop).transpose()?,
            take: args.take.or(file.take),
            sample: args.sample || file.sample.unwrap_or(false),
            seed: args.seed.or(file.seed).unwrap_or(0),
            out: args.out.clone().or_else(|| file.out.clone()),
        })
    }

    pub fn out_dir(&self) -> Result<&Path> {
        let out = self.out.as_deref().context("missing --out <dir>")?;
        std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        Ok(out)
    }

    pub fn load(&self) -> Result<Dataset> {
        self.load_from(self.input.as_deref())
    }

    /// Load with the same preprocessing but from `input` instead.
    pub fn load_from(&self, input: Option<&Path>) -> Result<Dataset> {
        let set = match (input, self.synthetic) {
            (Some(path), _) => {
                data::read_idx_images(path).with_context(|| format!("reading {}", path.display()))?
            }
            (None, Some(s)) => {
                data::synth_clusters(s.k, s.per_cluster, s.dim, s.flip_prob, self.seed)?.to_image_set()?
            }
            (None, None) => bail!("no data source"),
        };
        let set = match self.crop {
            Some((w, h)) => data::center_crop(&set, w, h)?,
            None => set,
        };
        let set = match self.take {
            Some(m) if self.sample => data::sample(&set, m, self.seed)?,
            Some(m) => data::take_first(&set, m)?,
            None => set,
        };
        if set.is_empty() {
            bail!("the dataset is empty");
        }
        Ok(Dataset::new(set))
    }
}

pub struct Dataset {
    pub images: ImageSet,
    pub inputs: Vec<BipolarVector>,
}

impl Dataset {
    fn new(images: ImageSet) -> Self {
        let inputs = images.to_bipolar();
        Self { images, inputs }
    }
}

/// Circuit parameters: config-file tables, then the dedicated flags.
pub fn resolve_circuit(args: &CircuitArgs, file: &FileConfig) -> Result<CircuitConfig> {
    let mut device = file.device.unwrap_or_default();
    let mut crossbar = file.crossbar.unwrap_or_default();
    if let Some(levels) = args.levels.or(file.levels) {
        if levels == 0 {
            bail!("--levels must be at least 1");
        }
        device = device.with_levels(levels);
    }
    if let Some(std) = args.noise_std.or(file.noise_std) {
        crossbar.output_noise_std = std;
    }
    if let Some(std) = args.pulse_noise_std.or(file.pulse_noise_std) {
        device.pulse_noise_std = std;
    }
    let config = CircuitConfig { device, crossbar };
    config.validate()?;
    Ok(config)
}
