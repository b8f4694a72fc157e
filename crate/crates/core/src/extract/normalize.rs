use crate::error::Result;
use crate::model::NormalizedSentence;

/// Lower-cases with simple one-to-one folding and collapses every whitespace
/// run to a single space, trimming both ends. Nothing else changes.
pub fn normalize_text(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    for c in raw.chars() {
        if c.is_whitespace() {
            pending_space = !out.is_empty();
            continue;
        }
        if pending_space {
            out.push(' ');
            pending_space = false;
        }
        out.push(fold(c));
    }
    out
}

// `char::to_lowercase` yields more than one char only for U+0130, whose
// simple mapping is the first char of the full mapping.
fn fold(c: char) -> char {
    if c.is_ascii() {
        return c.to_ascii_lowercase();
    }
    c.to_lowercase().next().unwrap_or(c)
}

/// Normalizes one raw sentence. Empty results are reported as
/// [`crate::Error::EmptySentence`] so callers can drop them.
pub fn normalize(raw: &str) -> Result<NormalizedSentence> {
    NormalizedSentence::new(raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;
    use proptest::prelude::*;

    #[test]
    fn folds_case_and_joins_wrapped_lines() {
        let s = normalize(
            "May be a transcription factor with important functions\n in eye and nasal development.",
        )
        .unwrap();
        assert_eq!(
            s.text(),
            "may be a transcription factor with important functions in eye and nasal development."
        );
    }

    #[test]
    fn collapses_tabs_and_trailing_space() {
        assert_eq!(normalize("Binds\t\tDNA.  ").unwrap().text(), "binds dna.");
    }

    #[test]
    fn normalized_input_is_unchanged() {
        let s = "binds dna in the nucleus.";
        assert_eq!(normalize_text(s), s);
    }

    #[test]
    fn punctuation_survives() {
        assert_eq!(normalize_text("E. coli vs E.coli"), "e. coli vs e.coli");
    }

    #[test]
    fn whitespace_only_is_empty() {
        assert!(matches!(normalize(" \t\n "), Err(Error::EmptySentence)));
    }

    #[test]
    fn dotted_capital_i_folds_to_one_char() {
        assert_eq!(normalize_text("\u{130}"), "i");
    }

    proptest! {
        #[test]
        fn normalization_is_idempotent(s in any::<String>()) {
            let once = normalize_text(&s);
            prop_assert_eq!(normalize_text(&once), once.clone());
            prop_assert!(!once.starts_with(' ') && !once.ends_with(' '));
            prop_assert!(!once.contains("  "));
            prop_assert!(once.chars().all(|c| c == ' ' || !c.is_whitespace()));
        }
    }
}
