//! Rule tables and script rules shipped with the crate.
//!
//! The tables approximate common romanization conventions for each script.
//! They are data, not ground truth, and can be replaced with files passed on
//! the command line.

use crate::grapheme::{GraphemeError, ScriptRules};
use crate::translit::{RuleTable, TranslitError};

pub const JAV_TO_AKSARA: &str = include_str!("../rules/jav.to_aksara.tsv");
pub const JAV_TO_LATIN: &str = include_str!("../rules/jav.to_latin.tsv");
pub const JAV_SCRIPT: &str = include_str!("../rules/jav.script");
pub const BAN_TO_AKSARA: &str = include_str!("../rules/ban.to_aksara.tsv");
pub const BAN_TO_LATIN: &str = include_str!("../rules/ban.to_latin.tsv");
pub const BAN_SCRIPT: &str = include_str!("../rules/ban.script");
pub const SUN_TO_AKSARA: &str = include_str!("../rules/sun.to_aksara.tsv");
pub const SUN_TO_LATIN: &str = include_str!("../rules/sun.to_latin.tsv");
pub const SUN_SCRIPT: &str = include_str!("../rules/sun.script");
pub const LJP_TO_AKSARA: &str = include_str!("../rules/ljp.to_aksara.tsv");
pub const LJP_TO_LATIN: &str = include_str!("../rules/ljp.to_latin.tsv");
pub const LJP_SCRIPT: &str = include_str!("../rules/ljp.script");

/// Script ids with bundled rules.
pub const SCRIPTS: [&str; 4] = ["jav", "ban", "sun", "ljp"];

/// The bundled rule set for one script.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub to_aksara: RuleTable,
    pub to_latin: RuleTable,
    pub script: ScriptRules,
}

#[derive(Debug, thiserror::Error)]
pub enum BundleError {
    #[error("no bundled rules for script `{0}`")]
    Unknown(String),
    #[error(transparent)]
    Table(#[from] TranslitError),
    #[error(transparent)]
    Script(#[from] GraphemeError),
}

pub fn bundle(script_id: &str) -> Result<Bundle, BundleError> {
    let (to_aksara, to_latin, script) = match script_id {
        "jav" => (JAV_TO_AKSARA, JAV_TO_LATIN, JAV_SCRIPT),
        "ban" => (BAN_TO_AKSARA, BAN_TO_LATIN, BAN_SCRIPT),
        "sun" => (SUN_TO_AKSARA, SUN_TO_LATIN, SUN_SCRIPT),
        "ljp" => (LJP_TO_AKSARA, LJP_TO_LATIN, LJP_SCRIPT),
        other => return Err(BundleError::Unknown(other.to_string())),
    };
    Ok(Bundle {
        to_aksara: RuleTable::parse(to_aksara)?,
        to_latin: RuleTable::parse(to_latin)?,
        script: ScriptRules::parse(script)?,
    })
}
