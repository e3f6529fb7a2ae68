use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

const DEFAULT_EXTENSIONS: &[(&str, &str)] = &[
    ("adoc", "AsciiDoc"),
    ("asciidoc", "AsciiDoc"),
    ("bash", "Shell"),
    ("c", "C"),
    ("cc", "C++"),
    ("clj", "Clojure"),
    ("coffee", "CoffeeScript"),
    ("cpp", "C++"),
    ("cs", "C#"),
    ("css", "CSS"),
    ("csv", "CSV"),
    ("cxx", "C++"),
    ("dart", "Dart"),
    ("erb", "HTML+ERB"),
    ("erl", "Erlang"),
    ("ex", "Elixir"),
    ("exs", "Elixir"),
    ("go", "Go"),
    ("groovy", "Groovy"),
    ("h", "C"),
    ("haml", "Haml"),
    ("hpp", "C++"),
    ("hs", "Haskell"),
    ("htm", "HTML"),
    ("html", "HTML"),
    ("java", "Java"),
    ("js", "JavaScript"),
    ("json", "JSON"),
    ("jsx", "JavaScript"),
    ("kt", "Kotlin"),
    ("lua", "Lua"),
    ("m", "Objective-C"),
    ("markdown", "Markdown"),
    ("md", "Markdown"),
    ("mjs", "JavaScript"),
    ("php", "PHP"),
    ("pl", "Perl"),
    ("proto", "Protocol Buffer"),
    ("py", "Python"),
    ("r", "R"),
    ("rake", "Ruby"),
    ("rb", "Ruby"),
    ("rs", "Rust"),
    ("rst", "reStructuredText"),
    ("sass", "Sass"),
    ("scala", "Scala"),
    ("scss", "SCSS"),
    ("sh", "Shell"),
    ("sql", "SQL"),
    ("swift", "Swift"),
    ("tf", "HCL"),
    ("toml", "TOML"),
    ("ts", "TypeScript"),
    ("tsx", "TypeScript"),
    ("txt", "Plain Text"),
    ("vue", "Vue"),
    ("xml", "XML"),
    ("yaml", "YAML"),
    ("yml", "YAML"),
];

const DEFAULT_MARKUP: &[&str] = &[
    "AsciiDoc",
    "CSV",
    "HTML",
    "JSON",
    "Markdown",
    "Plain Text",
    "reStructuredText",
    "TOML",
    "XML",
    "YAML",
];

const DEFAULT_STUB_EMAILS: &[&str] = &["*@localhost", "*@local", "*@(none)"];
const DEFAULT_STUB_NAMES: &[&str] = &["admin", "root", "ubuntu", "unknown"];

/// File classification and signature-stub settings.
///
/// Extension keys are stored lowercase and without the leading dot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LanguageConfig {
    pub extensions: BTreeMap<String, String>,
    /// Exact basenames (e.g. `Makefile`) mapped to a language.
    pub filenames: BTreeMap<String, String>,
    pub markup: BTreeSet<String>,
    pub stub_emails: Vec<String>,
    pub stub_names: BTreeSet<String>,
    pub min_token_length: usize,
    /// Only stem identifier subtokens longer than this many characters.
    /// `0` stems everything.
    pub stem_min_length: usize,
}

impl Default for LanguageConfig {
    fn default() -> Self {
        Self {
            extensions: DEFAULT_EXTENSIONS
                .iter()
                .map(|(e, l)| (e.to_string(), l.to_string()))
                .collect(),
            filenames: BTreeMap::new(),
            markup: DEFAULT_MARKUP.iter().map(|s| s.to_string()).collect(),
            stub_emails: DEFAULT_STUB_EMAILS.iter().map(|s| s.to_string()).collect(),
            stub_names: DEFAULT_STUB_NAMES.iter().map(|s| s.to_string()).collect(),
            min_token_length: 3,
            stem_min_length: 0,
        }
    }
}

impl LanguageConfig {
    /// Lowercases extension keys and strips any leading dot.
    pub fn normalized(mut self) -> Self {
        self.extensions = self
            .extensions
            .into_iter()
            .map(|(ext, lang)| (ext.trim_start_matches('.').to_lowercase(), lang))
            .collect();
        self
    }

    pub fn is_markup(&self, language: &str) -> bool {
        self.markup.contains(language)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Language {
    pub name: String,
    pub markup: bool,
}

/// Looks up the language of `path` by basename first, then by its lowercase
/// final extension.
pub fn detect_language(path: &str, config: &LanguageConfig) -> Option<Language> {
    let basename = path.rsplit('/').next().unwrap_or(path);
    let name = config.filenames.get(basename).or_else(|| {
        let (stem, ext) = basename.rsplit_once('.')?;
        if stem.is_empty() && !basename[1..].contains('.') {
            // dotfile such as `.gitignore`
            return None;
        }
        config.extensions.get(&ext.to_lowercase())
    })?;
    Some(Language {
        name: name.clone(),
        markup: config.is_markup(name),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn go_source() {
        let lang = detect_language("src/main.go", &LanguageConfig::default()).unwrap();
        assert_eq!(lang.name, "Go");
        assert!(!lang.markup);
    }

    #[test]
    fn readme_is_markup() {
        let lang = detect_language("README.md", &LanguageConfig::default()).unwrap();
        assert_eq!(lang.name, "Markdown");
        assert!(lang.markup);
    }

    #[test]
    fn makefile_needs_basename_mapping() {
        let mut config = LanguageConfig::default();
        assert_eq!(detect_language("Makefile", &config), None);
        config
            .filenames
            .insert("Makefile".to_string(), "Makefile".to_string());
        assert_eq!(
            detect_language("build/Makefile", &config).map(|l| l.name),
            Some("Makefile".to_string())
        );
    }

    #[test]
    fn extension_case_and_dotfiles() {
        let config = LanguageConfig::default();
        assert_eq!(
            detect_language("lib/App.RB", &config).map(|l| l.name),
            Some("Ruby".to_string())
        );
        assert_eq!(detect_language(".gitignore", &config), None);
        assert_eq!(detect_language("archive.tar.unknownext", &config), None);
    }

    #[test]
    fn normalized_strips_dots() {
        let mut config = LanguageConfig::default();
        config.extensions.clear();
        config.extensions.insert(".GO".to_string(), "Go".to_string());
        let config = config.normalized();
        assert_eq!(config.extensions.get("go").map(String::as_str), Some("Go"));
    }
}
