//! Source identifier tokenization: split, lowercase, stem, count.

use rust_stemmers::{Algorithm, Stemmer};

use super::language::LanguageConfig;
use super::types::TokenCounts;

/// Counts normalized identifier subtokens in `content`.
///
/// Identifiers are maximal runs of letters, digits and underscores that start
/// with a letter or underscore. Each one is split on underscores and
/// camel-case boundaries, lowercased and stemmed; short or purely numeric
/// subtokens are dropped.
pub fn extract_identifiers(content: &str, config: &LanguageConfig) -> TokenCounts {
    let stemmer = Stemmer::create(Algorithm::English);
    let mut counts = TokenCounts::new();
    for ident in identifier_runs(content) {
        for part in split_identifier(ident) {
            if let Some(token) = normalize_token(part, &stemmer, config) {
                *counts.entry(token).or_insert(0) += 1;
            }
        }
    }
    counts
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn identifier_runs(content: &str) -> impl Iterator<Item = &str> {
    content
        .split(|c: char| !is_ident_char(c))
        .filter(|run| {
            run.chars()
                .next()
                .is_some_and(|c| c.is_alphabetic() || c == '_')
        })
}

/// Splits `HTTPServerError_v2` into `HTTP`, `Server`, `Error`, `v2`.
pub fn split_identifier(ident: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    for piece in ident.split('_').filter(|p| !p.is_empty()) {
        let chars: Vec<(usize, char)> = piece.char_indices().collect();
        let mut start = 0;
        for i in 1..chars.len() {
            let (pos, c) = chars[i];
            let prev = chars[i - 1].1;
            let next_lower = chars.get(i + 1).is_some_and(|&(_, n)| n.is_lowercase());
            let boundary = c.is_uppercase()
                && (prev.is_lowercase()
                    || prev.is_numeric()
                    || (prev.is_uppercase() && next_lower));
            if boundary {
                parts.push(&piece[start..pos]);
                start = pos;
            }
        }
        parts.push(&piece[start..]);
    }
    parts
}

fn normalize_token(part: &str, stemmer: &Stemmer, config: &LanguageConfig) -> Option<String> {
    if part.chars().all(|c| c.is_numeric()) {
        return None;
    }
    let lower = part.to_lowercase();
    let token = if lower.chars().count() > config.stem_min_length {
        stemmer.stem(&lower).into_owned()
    } else {
        lower
    };
    (token.chars().count() >= config.min_token_length).then_some(token)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bag(pairs: &[(&str, u64)]) -> TokenCounts {
        pairs.iter().map(|(t, c)| (t.to_string(), *c)).collect()
    }

    #[test]
    fn camel_and_snake_case() {
        let got = extract_identifiers("getUserName user_name", &LanguageConfig::default());
        assert_eq!(got, bag(&[("get", 1), ("user", 2), ("name", 2)]));
    }

    #[test]
    fn stems_plurals() {
        let config = LanguageConfig::default();
        assert_eq!(extract_identifiers("languages", &config), bag(&[("languag", 1)]));
        assert_eq!(
            extract_identifiers("averages average", &config),
            bag(&[("averag", 2)])
        );
    }

    #[test]
    fn splitting_rules() {
        assert_eq!(
            split_identifier("HTTPServerError_v2"),
            vec!["HTTP", "Server", "Error", "v2"]
        );
        assert_eq!(split_identifier("utf8Decode"), vec!["utf8", "Decode"]);
        assert_eq!(split_identifier("__init__"), vec!["init"]);
        assert_eq!(split_identifier("ALLCAPS"), vec!["ALLCAPS"]);
    }

    #[test]
    fn drops_short_numeric_and_digit_led_runs() {
        let got = extract_identifiers("x = 0xff + 42; id_12 = foo(ab)", &LanguageConfig::default());
        assert_eq!(got, bag(&[("foo", 1)]));
    }

    #[test]
    fn stemming_is_idempotent_on_output() {
        let config = LanguageConfig::default();
        let text = "languages averages servlet flask javax chartjs graphql modernizr \
                    runner platform todos btree opclass using running connections";
        let first = extract_identifiers(text, &config);
        let joined: Vec<String> = first.keys().cloned().collect();
        let second = extract_identifiers(&joined.join(" "), &config);
        assert_eq!(
            first.keys().collect::<Vec<_>>(),
            second.keys().collect::<Vec<_>>()
        );
    }

    #[test]
    fn stem_threshold_leaves_short_words() {
        let config = LanguageConfig {
            stem_min_length: 6,
            ..LanguageConfig::default()
        };
        let got = extract_identifiers("todos using languages", &config);
        assert_eq!(got, bag(&[("languag", 1), ("todos", 1), ("using", 1)]));
    }
}
