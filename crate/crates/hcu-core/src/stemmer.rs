//! Aggressive suffix-stripping stemmer driven by an ordered rewrite-rule
//! table (the Paice/Husk "Lancaster" algorithm).
//!
//! Rules are written in the compact published notation, e.g. `"mu*2."`:
//! reversed suffix (`mu` matches words ending in `um`), optional `*` for
//! intact-only rules, a digit giving how many trailing letters to remove, an
//! optional append string, and `>` (continue stemming) or `.` (stop). Rules
//! are grouped by the final letter of the suffix and tried in table order;
//! a candidate rewrite is applied only if the acceptability condition keeps a
//! pronounceable stem.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum StemRuleError {
    #[error("unparseable rule {rule:?} on line {line}")]
    Malformed { rule: String, line: usize },
}

/// The published Paice/Husk rule table.
const DEFAULT_RULES: &[&str] = &[
    "ai*2.", "a*1.", "bb1.", "city3s.", "ci2>", "cn1t>", "dd1.", "dei3y>", "deec2ss.", "dee1.",
    "de2>", "dooh4>", "e1>", "feil1v.", "fi2>", "gni3>", "gai3y.", "ga2>", "gg1.", "ht*2.",
    "hsiug5ct.", "hsi3>", "i*1.", "i1y>", "ji1d.", "juf1s.", "ju1d.", "jo1d.", "jeh1r.",
    "jrev1t.", "jsim2t.", "jn1d.", "j1s.", "lbaifi6.", "lbai4y.", "lba3>", "lbi3.", "lib2l>",
    "lc1.", "lufi4y.", "luf3>", "lu2.", "lai3>", "lau3>", "la2>", "ll1.", "mui3.", "mu*2.",
    "msi3>", "mm1.", "nois4j>", "noix4ct.", "noi3>", "nai3>", "na2>", "nee0.", "ne2>", "nn1.",
    "pihs4>", "pp1.", "re2>", "rae0.", "ra2.", "ro2>", "ru2>", "rr1.", "rt1>", "rei3y>",
    "sei3y>", "sis2.", "si2>", "ssen4>", "ss0.", "suo3>", "su*2.", "s*1>", "s0.", "tacilp4c.",
    "ta2>", "tnem4>", "tne3>", "tna3>", "tpir2b.", "tpro2b.", "tcud1.", "tpmus2.", "tpec2iv.",
    "tulo2v.", "tsis0.", "tsi3>", "tt1.", "uqi3.", "ugo1.", "vis3j>", "vie0.", "vi2>", "ylb1>",
    "yli3y>", "ylp0.", "yl2>", "ygo1.", "yhp1.", "ymo1.", "ypo1.", "yti3>", "yte3>", "ytl2.",
    "yrtsi5.", "yra3>", "yro3>", "yfi3.", "ycn2t>", "yca3>", "zi2>", "zy1s.",
];

#[derive(Debug, Clone)]
struct StemRule {
    /// Suffix in normal (unreversed) order.
    suffix: String,
    intact_only: bool,
    remove: usize,
    append: String,
    terminal: bool,
}

/// Ordered suffix-rewrite rule table, indexed by the last letter of a word.
#[derive(Debug, Clone)]
pub struct Stemmer {
    groups: [Vec<StemRule>; 26],
}

impl Stemmer {
    /// The stemmer with the published default rule table.
    pub fn lancaster() -> Self {
        Self::from_rule_lines(&DEFAULT_RULES.join("\n")).expect("default rule table parses")
    }

    /// Parses an override table, one rule per line in the published notation.
    /// Blank lines and lines starting with `#` are ignored.
    pub fn from_rule_lines(text: &str) -> Result<Self, StemRuleError> {
        let mut groups: [Vec<StemRule>; 26] = Default::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let rule = parse_rule(line).ok_or_else(|| StemRuleError::Malformed {
                rule: line.to_string(),
                line: idx + 1,
            })?;
            let group = rule.suffix.bytes().last().expect("non-empty suffix") - b'a';
            groups[group as usize].push(rule);
        }
        Ok(Stemmer { groups })
    }

    /// Stems one word. Deterministic, total; input that is not purely ASCII
    /// alphabetic is returned unchanged (lowercased).
    pub fn stem(&self, word: &str) -> String {
        let mut current = word.to_lowercase();
        if current.is_empty() || !current.bytes().all(|b| b.is_ascii_lowercase()) {
            return current;
        }
        let intact = current.clone();
        // the published table always terminates; the cap guards odd override tables
        for _ in 0..1000 {
            let last = current.as_bytes()[current.len() - 1];
            let rules = &self.groups[(last - b'a') as usize];
            let mut applied = false;
            for rule in rules {
                if !current.ends_with(&rule.suffix) {
                    continue;
                }
                if rule.intact_only && current != intact {
                    continue;
                }
                if !acceptable(&current, rule.remove) {
                    continue;
                }
                current.truncate(current.len() - rule.remove);
                current.push_str(&rule.append);
                if rule.terminal {
                    return current;
                }
                applied = true;
                break;
            }
            if !applied || current.is_empty() {
                return current;
            }
        }
        current
    }
}

fn parse_rule(text: &str) -> Option<StemRule> {
    let bytes = text.as_bytes();
    let mut pos = 0;
    let start = pos;
    while pos < bytes.len() && bytes[pos].is_ascii_lowercase() {
        pos += 1;
    }
    if pos == start {
        return None;
    }
    let suffix: String = text[start..pos].chars().rev().collect();
    let intact_only = pos < bytes.len() && bytes[pos] == b'*';
    if intact_only {
        pos += 1;
    }
    if pos >= bytes.len() || !bytes[pos].is_ascii_digit() {
        return None;
    }
    let remove = (bytes[pos] - b'0') as usize;
    pos += 1;
    let append_start = pos;
    while pos < bytes.len() && bytes[pos].is_ascii_lowercase() {
        pos += 1;
    }
    let append = text[append_start..pos].to_string();
    let terminal = match bytes.get(pos) {
        Some(b'.') => true,
        Some(b'>') => false,
        _ => return None,
    };
    if pos + 1 != bytes.len() {
        return None;
    }
    Some(StemRule {
        suffix,
        intact_only,
        remove,
        append,
        terminal,
    })
}

/// Acceptability condition: a stem starting with a vowel keeps at least two
/// letters; one starting with a consonant keeps at least three and has a
/// vowel (or `y`) in its second or third position.
fn acceptable(word: &str, remove: usize) -> bool {
    let bytes = word.as_bytes();
    let is_vowel = |b: u8| matches!(b, b'a' | b'e' | b'i' | b'o' | b'u' | b'y');
    if is_vowel(bytes[0]) {
        word.len() - remove >= 2
    } else {
        word.len() - remove >= 3 && (is_vowel(bytes[1]) || is_vowel(bytes[2]))
    }
}
