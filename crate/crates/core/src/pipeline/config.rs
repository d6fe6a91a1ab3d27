use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::assets;
use crate::grapheme::ScriptRules;
use crate::renderer::{FontAsset, GlyphRaster, RenderConfig};
use crate::translit::RuleTable;

/// Rule files for one language. Missing entries fall back to the bundled
/// rules for the language, or to identity tables when none are bundled.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RulePaths {
    pub to_aksara: Option<PathBuf>,
    pub to_latin: Option<PathBuf>,
    pub script: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    pub train: f64,
    pub eval: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let ok = |f: f64| (0.0..=1.0).contains(&f);
        if !ok(self.train) || !ok(self.eval) {
            return Err(PipelineError::Validation(format!(
                "split fractions must lie in [0, 1], got {} and {}",
                self.train, self.eval
            )));
        }
        if (self.train + self.eval - 1.0).abs() > 1e-9 {
            return Err(PipelineError::Validation(format!(
                "split fractions must sum to 1, got {}",
                self.train + self.eval
            )));
        }
        Ok(())
    }
}

/// Declarative description of one dataset build, read from TOML.
///
/// ```toml
/// language = "jav"
/// input_paths = ["corpus/jav.txt"]
/// output_dir = "out/jav"
/// build_vocab = true
///
/// [render]
/// font_asset = "fonts/NotoSansJavanese-Regular.ttf"
///
/// [split]
/// train = 0.9
/// eval = 0.1
/// seed = 13
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub language: String,
    #[serde(default)]
    pub rules: RulePaths,
    #[serde(default)]
    pub vocab_path: Option<PathBuf>,
    #[serde(default)]
    pub build_vocab: bool,
    #[serde(default = "default_min_count")]
    pub min_count: usize,
    /// Defaults to [`RenderConfig::for_language`].
    #[serde(default)]
    pub render: Option<RenderConfig>,
    pub input_paths: Vec<PathBuf>,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub split: Option<SplitSpec>,
    #[serde(default)]
    pub lowercase: bool,
    #[serde(default)]
    pub lenient: bool,
    /// Worker threads for the per-line stages; all cores when unset.
    #[serde(default)]
    pub workers: Option<usize>,
}

fn default_min_count() -> usize {
    1
}

pub(crate) struct Resources {
    pub to_aksara: RuleTable,
    pub to_latin: RuleTable,
    pub script: ScriptRules,
    pub raster: Box<dyn GlyphRaster>,
}

impl PipelineConfig {
    pub fn new(language: impl Into<String>, input_paths: Vec<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            language: language.into(),
            rules: RulePaths::default(),
            vocab_path: None,
            build_vocab: true,
            min_count: 1,
            render: None,
            input_paths,
            output_dir: output_dir.into(),
            split: None,
            lowercase: false,
            lenient: false,
            workers: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Validation(format!("config: {e}")))
    }

    /// Reads a config file. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text =
            fs::read_to_string(path).map_err(|e| PipelineError::Validation(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| PipelineError::Validation(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_relative_to(base);
        Ok(cfg)
    }

    fn resolve_relative_to(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in self.input_paths.iter_mut() {
            fix(p);
        }
        fix(&mut self.output_dir);
        for p in [
            &mut self.rules.to_aksara,
            &mut self.rules.to_latin,
            &mut self.rules.script,
            &mut self.vocab_path,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        if let Some(FontAsset::File(p)) = self.render.as_mut().map(|r| &mut r.font_asset) {
            fix(p);
        }
    }

    pub fn render_config(&self) -> RenderConfig {
        self.render
            .clone()
            .unwrap_or_else(|| RenderConfig::for_language(&self.language))
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let invalid = |m: String| Err(PipelineError::Validation(m));
        if self.language.is_empty()
            || !self
                .language
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return invalid(format!("language `{}` must be a non-empty ASCII code", self.language));
        }
        for p in &self.input_paths {
            require_file(p, "input")?;
        }
        for (p, what) in [
            (&self.rules.to_aksara, "to-aksara rule table"),
            (&self.rules.to_latin, "to-latin rule table"),
            (&self.rules.script, "script rules"),
        ] {
            if let Some(p) = p {
                require_file(p, what)?;
            }
        }
        match (&self.vocab_path, self.build_vocab) {
            (Some(_), true) => return invalid("set either vocab_path or build_vocab, not both".into()),
            (None, false) => return invalid("set vocab_path or build_vocab".into()),
            (Some(p), false) => require_file(p, "vocabulary")?,
            (None, true) => {}
        }
        if self.min_count == 0 {
            return invalid("min_count must be at least 1".into());
        }
        let render = self.render_config();
        render
            .validate()
            .map_err(|e| PipelineError::Validation(e.to_string()))?;
        if let FontAsset::File(p) = &render.font_asset {
            require_file(p, "font")?;
        }
        if let Some(s) = &self.split {
            s.validate()?;
        }
        if self.workers == Some(0) {
            return invalid("workers must be at least 1".into());
        }
        Ok(())
    }

    pub(crate) fn load_resources(&self) -> Result<Resources, PipelineError> {
        let bundled = if assets::SCRIPTS.contains(&self.language.as_str()) {
            Some(assets::bundle(&self.language).map_err(|e| PipelineError::Validation(e.to_string()))?)
        } else {
            None
        };
        let table = |path: &Option<PathBuf>, fallback: Option<&RuleTable>| match path {
            Some(p) => RuleTable::load(p).map_err(|e| PipelineError::Validation(format!("{}: {e}", p.display()))),
            None => Ok(fallback.cloned().unwrap_or_else(RuleTable::identity)),
        };
        let to_aksara = table(&self.rules.to_aksara, bundled.as_ref().map(|b| &b.to_aksara))?;
        let to_latin = table(&self.rules.to_latin, bundled.as_ref().map(|b| &b.to_latin))?;
        let script = match &self.rules.script {
            Some(p) => {
                let text =
                    fs::read_to_string(p).map_err(|e| PipelineError::Validation(format!("{}: {e}", p.display())))?;
                ScriptRules::parse(&text).map_err(|e| PipelineError::Validation(format!("{}: {e}", p.display())))?
            }
            None => bundled.map(|b| b.script).unwrap_or_else(ScriptRules::none),
        };
        let raster = self
            .render_config()
            .font_asset
            .load()
            .map_err(|e| PipelineError::Validation(e.to_string()))?;
        Ok(Resources {
            to_aksara,
            to_latin,
            script,
            raster,
        })
    }
}

fn require_file(p: &Path, what: &str) -> Result<(), PipelineError> {
    if p.is_file() {
        Ok(())
    } else {
        Err(PipelineError::Validation(format!(
            "{what} file {} does not exist",
            p.display()
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let cfg = PipelineConfig::parse(
            r#"
            language = "sun"
            input_paths = ["a.txt"]
            output_dir = "out"
            build_vocab = true
            "#,
        )
        .unwrap();
        assert_eq!(cfg.min_count, 1);
        assert_eq!(cfg.render_config(), RenderConfig::default());
        assert!(cfg.split.is_none());
    }

    #[test]
    fn lampung_defaults_to_larger_font() {
        let cfg = PipelineConfig::new("ljp", vec![], "out");
        assert_eq!(cfg.render_config().font_size, 10);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err =
            PipelineConfig::parse("language = \"jav\"\ninput_paths = []\noutput_dir = \"o\"\nfoo = 1").unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn relative_paths_follow_the_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("c.toml");
        fs::write(
            &cfg_path,
            "language = \"jav\"\ninput_paths = [\"in.txt\"]\noutput_dir = \"out\"\nbuild_vocab = true\n[render]\nfont_asset = \"f.ttf\"\n",
        )
        .unwrap();
        let cfg = PipelineConfig::from_file(&cfg_path).unwrap();
        assert_eq!(cfg.input_paths, vec![dir.path().join("in.txt")]);
        assert_eq!(cfg.output_dir, dir.path().join("out"));
        assert_eq!(
            cfg.render_config().font_asset,
            FontAsset::File(dir.path().join("f.ttf"))
        );
    }

    #[test]
    fn validation_errors() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in.txt");
        fs::write(&input, "a\n").unwrap();
        let base = PipelineConfig::new("jav", vec![input.clone()], dir.path().join("out"));
        base.validate().unwrap();

        let mut c = base.clone();
        c.input_paths.push(dir.path().join("missing.txt"));
        assert!(c.validate().unwrap_err().to_string().contains("missing.txt"));

        let mut c = base.clone();
        c.vocab_path = Some(input.clone());
        assert!(c.validate().is_err());

        let mut c = base.clone();
        c.split = Some(SplitSpec {
            train: 0.8,
            eval: 0.3,
            seed: 0,
        });
        assert!(c.validate().is_err());

        let mut c = base.clone();
        c.language = "../x".into();
        assert!(c.validate().is_err());

        let mut c = base.clone();
        c.workers = Some(0);
        assert!(c.validate().is_err());

        let mut c = base;
        c.render = Some(RenderConfig {
            font_asset: FontAsset::File(dir.path().join("nofont.ttf")),
            ..RenderConfig::default()
        });
        assert_eq!(c.validate().unwrap_err().exit_code(), 1);
    }
}
