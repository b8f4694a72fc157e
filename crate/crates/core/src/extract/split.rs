//! Rule-based sentence splitter.
//!
//! A sentence ends at `.`, `!` or `?` (plus any trailing closing brackets or
//! quotes) that is followed by whitespace or the end of the text. A period
//! never ends a sentence when the word it closes is a protected
//! abbreviation or a single letter, so species initials like `E. coli`
//! stay intact.

const PROTECTED: &[&str] = &["e.g.", "i.e.", "cf.", "sp.", "approx."];

const TERMINATORS: &[char] = &['.', '!', '?'];
const CLOSERS: &[char] = &[')', ']', '}', '"', '\'', '\u{201d}', '\u{2019}'];
const OPENERS: &[char] = &['(', '[', '{', '"', '\'', '\u{201c}', '\u{2018}'];

pub fn split_sentences(text: &str) -> Vec<String> {
    let mut sentences = Vec::new();
    let mut start = 0;
    let mut iter = text.char_indices().peekable();

    while let Some((i, c)) = iter.next() {
        if !TERMINATORS.contains(&c) {
            continue;
        }
        let mut end = i + c.len_utf8();
        let mut last_terminator = c;
        while let Some(&(j, next)) = iter.peek() {
            if TERMINATORS.contains(&next) {
                last_terminator = next;
            } else if !CLOSERS.contains(&next) {
                break;
            }
            end = j + next.len_utf8();
            iter.next();
        }
        let at_boundary = match iter.peek() {
            None => true,
            Some(&(_, next)) => next.is_whitespace(),
        };
        if !at_boundary {
            continue;
        }
        if last_terminator == '.' && is_protected(&text[start..end]) {
            continue;
        }
        push_trimmed(&mut sentences, &text[start..end]);
        start = end;
    }
    push_trimmed(&mut sentences, &text[start..]);
    sentences
}

fn push_trimmed(out: &mut Vec<String>, piece: &str) {
    let piece = piece.trim();
    if !piece.is_empty() {
        out.push(piece.to_owned());
    }
}

/// Checks the word closed by the final period of `candidate`.
fn is_protected(candidate: &str) -> bool {
    let body = candidate.trim_end_matches(CLOSERS);
    let mut words = body.rsplit(char::is_whitespace);
    let word = words
        .next()
        .unwrap_or("")
        .trim_start_matches(OPENERS)
        .to_lowercase();

    if PROTECTED.contains(&word.as_str()) {
        return true;
    }
    if word == "al." {
        let previous = words.find(|w| !w.is_empty()).unwrap_or("");
        if previous.trim_start_matches(OPENERS).eq_ignore_ascii_case("et") {
            return true;
        }
    }
    let mut chars = word.chars();
    matches!((chars.next(), chars.next(), chars.next()), (Some(l), Some('.'), None) if l.is_alphabetic())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn splits_two_plain_sentences() {
        assert_eq!(
            split_sentences("Two motifs. One family."),
            ["Two motifs.", "One family."]
        );
    }

    #[test]
    fn keeps_species_initials_together() {
        assert_eq!(
            split_sentences("Found in E. coli. Binds DNA."),
            ["Found in E. coli.", "Binds DNA."]
        );
    }

    #[test]
    fn trailing_fragment_is_kept() {
        assert_eq!(split_sentences("no terminator"), ["no terminator"]);
        assert_eq!(split_sentences("One. two"), ["One.", "two"]);
    }

    #[test]
    fn protected_abbreviations_do_not_split() {
        assert_eq!(
            split_sentences("Several kinases, e.g. PKA, bind it. Shown by Smith et al. in 1999. See also (cf. ref 3)."),
            [
                "Several kinases, e.g. PKA, bind it.",
                "Shown by Smith et al. in 1999.",
                "See also (cf. ref 3)."
            ]
        );
        assert_eq!(
            split_sentences("Found in Bacillus sp. strains. Approx. 300 aa long."),
            ["Found in Bacillus sp. strains.", "Approx. 300 aa long."]
        );
    }

    #[test]
    fn al_without_et_is_a_terminator() {
        assert_eq!(split_sentences("Binds Al. Binds Fe."), ["Binds Al.", "Binds Fe."]);
    }

    #[test]
    fn closing_brackets_stay_with_their_sentence() {
        assert_eq!(
            split_sentences("It binds zinc (weakly.) Then it folds! Really?"),
            ["It binds zinc (weakly.)", "Then it folds!", "Really?"]
        );
    }

    #[test]
    fn decimals_and_inner_periods_do_not_split() {
        assert_eq!(
            split_sentences("Kd is 1.5 nM at pH 7.4. Done."),
            ["Kd is 1.5 nM at pH 7.4.", "Done."]
        );
    }

    #[test]
    fn empty_input_gives_nothing() {
        assert!(split_sentences("").is_empty());
        assert!(split_sentences("  \n ").is_empty());
    }

    fn strip_ws(s: &str) -> String {
        s.chars().filter(|c| !c.is_whitespace()).collect()
    }

    proptest! {
        #[test]
        fn splitting_loses_nothing_but_whitespace(s in "[a-zA-Z .!?()\n]{0,80}") {
            let parts = split_sentences(&s);
            prop_assert_eq!(strip_ws(&parts.concat()), strip_ws(&s));
            for (i, p) in parts.iter().enumerate() {
                prop_assert!(!p.is_empty());
                let ends = p.trim_end_matches(CLOSERS).ends_with(TERMINATORS);
                prop_assert!(ends || i + 1 == parts.len());
            }
        }
    }
}
