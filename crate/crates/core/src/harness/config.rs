//! Flat key = value experiment configuration. Unknown keys are errors.

use crate::error::Error;
use crate::Result;

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    /// preset name or coefficient list (see `parse_map_spec`)
    pub map: String,
    pub depths: Vec<usize>,
    pub resolution: usize,
    pub seed: u64,
    pub curve_vertices: usize,
    pub base_radius_factor: f64,
    pub length_bound_factor: f64,
    pub blend_resolution: usize,
    pub annulus_resolution: usize,
    pub census_horizon: usize,
    pub beltrami_horizon: usize,
    pub escape_horizon: usize,
    pub escape_radius: f64,
    /// equipotential level; non-positive means automatic
    pub rho: f64,
    pub search_k: usize,
    pub search_seeds: usize,
    pub render: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            map: "misiurewicz-cubic".into(),
            depths: vec![1, 2, 3],
            resolution: 1024,
            seed: 42,
            curve_vertices: 256,
            base_radius_factor: 0.45,
            length_bound_factor: 12.0,
            blend_resolution: 256,
            annulus_resolution: 512,
            census_horizon: 96,
            beltrami_horizon: 200,
            escape_horizon: 1000,
            escape_radius: 1e4,
            rho: 0.0,
            search_k: 4,
            search_seeds: 192,
            render: false,
        }
    }
}

impl ExperimentConfig {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "line {}: expected `key = value`, got `{line}`",
                    lineno + 1
                )));
            };
            let key = key.trim();
            let value = value.trim();
            let bad = |what: &str| {
                Error::Config(format!("line {}: bad {what} value `{value}`", lineno + 1))
            };
            match key {
                "map" => config.map = value.to_string(),
                "depths" => {
                    let mut depths = Vec::new();
                    for part in value.split(',') {
                        depths.push(
                            part.trim()
                                .parse::<usize>()
                                .map_err(|_| bad("depths"))?,
                        );
                    }
                    depths.sort_unstable();
                    depths.dedup();
                    if depths.is_empty() || depths[0] == 0 {
                        return Err(bad("depths"));
                    }
                    config.depths = depths;
                }
                "resolution" => config.resolution = value.parse().map_err(|_| bad(key))?,
                "seed" => config.seed = value.parse().map_err(|_| bad(key))?,
                "curve_vertices" => config.curve_vertices = value.parse().map_err(|_| bad(key))?,
                "base_radius_factor" => {
                    config.base_radius_factor = value.parse().map_err(|_| bad(key))?
                }
                "length_bound_factor" => {
                    config.length_bound_factor = value.parse().map_err(|_| bad(key))?
                }
                "blend_resolution" => {
                    config.blend_resolution = value.parse().map_err(|_| bad(key))?
                }
                "annulus_resolution" => {
                    config.annulus_resolution = value.parse().map_err(|_| bad(key))?
                }
                "census_horizon" => config.census_horizon = value.parse().map_err(|_| bad(key))?,
                "beltrami_horizon" => {
                    config.beltrami_horizon = value.parse().map_err(|_| bad(key))?
                }
                "escape_horizon" => config.escape_horizon = value.parse().map_err(|_| bad(key))?,
                "escape_radius" => config.escape_radius = value.parse().map_err(|_| bad(key))?,
                "rho" => {
                    config.rho = if value == "auto" {
                        0.0
                    } else {
                        value.parse().map_err(|_| bad(key))?
                    }
                }
                "search_k" => config.search_k = value.parse().map_err(|_| bad(key))?,
                "search_seeds" => config.search_seeds = value.parse().map_err(|_| bad(key))?,
                "render" => {
                    config.render = match value {
                        "true" | "1" | "yes" => true,
                        "false" | "0" | "no" => false,
                        _ => return Err(bad(key)),
                    }
                }
                _ => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key `{key}`",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(config)
    }

    /// Canonical echo used in reports; reparsing it reproduces the config.
    pub fn canonical_text(&self) -> String {
        let depths: Vec<String> = self.depths.iter().map(|d| d.to_string()).collect();
        format!(
            "map = {}\ndepths = {}\nresolution = {}\nseed = {}\ncurve_vertices = {}\n\
             base_radius_factor = {}\nlength_bound_factor = {}\nblend_resolution = {}\n\
             annulus_resolution = {}\ncensus_horizon = {}\nbeltrami_horizon = {}\n\
             escape_horizon = {}\nescape_radius = {}\nrho = {}\nsearch_k = {}\n\
             search_seeds = {}\nrender = {}\n",
            self.map,
            depths.join(","),
            self.resolution,
            self.seed,
            self.curve_vertices,
            self.base_radius_factor,
            self.length_bound_factor,
            self.blend_resolution,
            self.annulus_resolution,
            self.census_horizon,
            self.beltrami_horizon,
            self.escape_horizon,
            self.escape_radius,
            if self.rho > 0.0 { self.rho.to_string() } else { "auto".into() },
            self.search_k,
            self.search_seeds,
            self.render,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_roundtrips() {
        let text = "map = z2p4\ndepths = 2,1,2\nseed = 7\nrender = true\n# comment\n";
        let config = ExperimentConfig::parse(text).unwrap();
        assert_eq!(config.map, "z2p4");
        assert_eq!(config.depths, vec![1, 2]);
        assert_eq!(config.seed, 7);
        assert!(config.render);
        let echoed = ExperimentConfig::parse(&config.canonical_text()).unwrap();
        assert_eq!(echoed.canonical_text(), config.canonical_text());
    }

    #[test]
    fn unknown_key_is_an_error() {
        match ExperimentConfig::parse("mapp = z2\n") {
            Err(Error::Config(msg)) => assert!(msg.contains("unknown key")),
            other => panic!("expected Config error, got {other:?}"),
        }
    }

    #[test]
    fn zero_depth_rejected() {
        assert!(ExperimentConfig::parse("depths = 0,1\n").is_err());
    }
}
