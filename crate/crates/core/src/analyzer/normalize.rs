//! Word normalizers applied after lowercasing.
//!
//! The same normalizer must be used when training embeddings and when
//! analyzing documents, otherwise category members and document tokens
//! live in different spellings.

/// Maps a lowercased word to its normalized form.
///
/// Implementations must be idempotent: `normalize(normalize(w)) == normalize(w)`.
pub trait Normalizer: Send + Sync {
    fn normalize(&self, word: &str) -> String;
}

/// Leaves words unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl Normalizer for Identity {
    fn normalize(&self, word: &str) -> String {
        word.to_string()
    }
}

/// Rule-based suffix stripper for English inflections.
///
/// Handles plural / third person `-s` and `-es`, `-ies`, `-ing` and `-ed`
/// (with consonant undoubling and silent-e restoration) and possessive
/// `'s`. Hyphenated compounds and other words with internal apostrophes
/// are left alone. Rules are applied until nothing changes, which makes the
/// result idempotent.
#[derive(Debug, Clone, Copy, Default)]
pub struct SuffixStripper;

impl Normalizer for SuffixStripper {
    fn normalize(&self, word: &str) -> String {
        let mut current = word.to_string();
        while let Some(next) = strip_once(&current) {
            current = next;
        }
        current
    }
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

fn strip_once(word: &str) -> Option<String> {
    if word.chars().any(is_apostrophe) {
        for possessive in ["'s", "\u{2019}s"] {
            if let Some(stem) = word.strip_suffix(possessive) {
                if stem.chars().count() >= 2 && !stem.chars().any(is_apostrophe) {
                    return Some(stem.to_string());
                }
            }
        }
        return None;
    }
    if !word.chars().all(|c| c.is_ascii_lowercase()) {
        return None;
    }
    let len = word.len();

    if len > 4 && word.ends_with("ies") {
        return Some(format!("{}y", &word[..len - 3]));
    }
    if word.ends_with("sses") || word.ends_with("zzes") {
        return Some(word[..len - 2].to_string());
    }
    if len > 4 && (word.ends_with("shes") || word.ends_with("ches") || word.ends_with("xes")) {
        return Some(word[..len - 2].to_string());
    }
    if len >= 4
        && word.ends_with('s')
        && !(word.ends_with("ss") || word.ends_with("us") || word.ends_with("is"))
    {
        return Some(word[..len - 1].to_string());
    }
    if len > 4 && word.ends_with("ied") {
        return Some(format!("{}y", &word[..len - 3]));
    }
    if word.ends_with("ing") {
        return restore_stem(&word[..len - 3]);
    }
    if word.ends_with("ed") && !word.ends_with("eed") {
        return restore_stem(&word[..len - 2]);
    }
    None
}

/// Repairs a stem left after removing `-ing` / `-ed`. Returns `None` when
/// the stem is too short to be a real word, in which case nothing is
/// stripped.
fn restore_stem(stem: &str) -> Option<String> {
    let chars: Vec<char> = stem.chars().collect();
    if chars.len() < 3 || !chars.iter().any(|&c| is_vowel(c) || c == 'y') {
        return None;
    }
    let n = chars.len();
    let last = chars[n - 1];
    let prev = chars[n - 2];

    if last == prev && !is_vowel(last) && !matches!(last, 'l' | 's' | 'z') {
        return Some(chars[..n - 1].iter().collect());
    }
    let single_s = last == 's' && prev != 's';
    let single_z = last == 'z' && prev != 'z';
    let cvc = n == 3
        && !is_vowel(chars[0])
        && is_vowel(chars[1])
        && !is_vowel(last)
        && !matches!(last, 'w' | 'x' | 'y');
    if single_s || single_z || cvc || matches!(last, 'v' | 'c' | 'u') {
        return Some(format!("{stem}e"));
    }
    Some(stem.to_string())
}
