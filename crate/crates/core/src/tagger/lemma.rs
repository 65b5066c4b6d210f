//! Deterministic suffix-stripping lemmatizer for recipe verbs.

/// Inflected forms the suffix rules get wrong, checked before any rule.
const EXCEPTIONS: &[(&str, &str)] = &[
    ("beaten", "beat"),
    ("shaken", "shake"),
    ("frozen", "freeze"),
    ("froze", "freeze"),
    ("brought", "bring"),
    ("spread", "spread"),
    ("spreads", "spread"),
    ("shred", "shred"),
    ("seed", "seed"),
    ("seeds", "seed"),
    ("need", "need"),
    ("feed", "feed"),
    ("bleed", "bleed"),
    ("speed", "speed"),
    ("breed", "breed"),
    ("weed", "weed"),
    ("sauteed", "saute"),
    ("sauteing", "saute"),
    ("combined", "combine"),
    ("combining", "combine"),
    ("prepared", "prepare"),
    ("preparing", "prepare"),
    ("measured", "measure"),
    ("measuring", "measure"),
    ("divided", "divide"),
    ("dividing", "divide"),
    ("tasted", "taste"),
    ("tasting", "taste"),
    ("basted", "baste"),
    ("basting", "baste"),
    ("braised", "braise"),
    ("braising", "braise"),
    ("changed", "change"),
    ("changing", "change"),
    ("plunged", "plunge"),
    ("plunging", "plunge"),
    ("raised", "raise"),
    ("raising", "raise"),
    ("pureed", "puree"),
    ("pureeing", "puree"),
    ("poured", "pour"),
    ("pouring", "pour"),
    ("layered", "layer"),
    ("layering", "layer"),
    ("made", "make"),
    ("let", "let"),
    ("put", "put"),
    ("set", "set"),
    ("cut", "cut"),
    ("left", "leave"),
    ("taken", "take"),
    ("ground", "ground"),
];

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

fn has_vowel(s: &[u8]) -> bool {
    s.iter().any(|&c| is_vowel(c) || c == b'y')
}

/// Number of maximal vowel runs, a rough syllable count.
fn vowel_groups(s: &[u8]) -> usize {
    let mut groups = 0;
    let mut prev = false;
    for &c in s {
        let v = is_vowel(c);
        if v && !prev {
            groups += 1;
        }
        prev = v;
    }
    groups
}

/// consonant-vowel-consonant ending, last consonant not w/x/y.
fn ends_cvc(s: &[u8]) -> bool {
    let n = s.len();
    n >= 3
        && !is_vowel(s[n - 3])
        && is_vowel(s[n - 2])
        && !is_vowel(s[n - 1])
        && !matches!(s[n - 1], b'w' | b'x' | b'y')
}

/// Whether a stripped stem lost a silent final `e`.
fn needs_e(s: &[u8]) -> bool {
    let n = s.len();
    let last = s[n - 1];
    let prev = if n >= 2 { s[n - 2] } else { 0 };
    match last {
        b'v' | b'c' | b'u' => true,
        b'z' => prev != b'z',
        b'l' => b"bcdfgkptz".contains(&prev),
        b's' => b"nlrp".contains(&prev),
        b'g' => prev == b'd' || (prev == b'n' && vowel_groups(s) >= 2),
        b't' if prev == b'a' && n >= 3 && !is_vowel(s[n - 3]) && vowel_groups(s) >= 2 => true,
        _ => vowel_groups(s) == 1 && ends_cvc(s),
    }
}

/// Undoubles `stirr` -> `stir`, leaving `add`, `grill`, `toss` alone.
fn undouble(s: &[u8]) -> Option<&[u8]> {
    let n = s.len();
    if n >= 4 && s[n - 1] == s[n - 2] && b"bdgmnprt".contains(&s[n - 1]) {
        let shorter = &s[..n - 1];
        if vowel_groups(shorter) == 1 && ends_cvc(shorter) {
            return Some(shorter);
        }
    }
    None
}

fn restore(stem: &[u8]) -> String {
    if let Some(s) = undouble(stem) {
        return String::from_utf8_lossy(s).into_owned();
    }
    let mut out = String::from_utf8_lossy(stem).into_owned();
    if needs_e(stem) {
        out.push('e');
    }
    out
}

/// Reduces an inflected verb form to its base form.
///
/// The exception table is consulted first, then the `-ing`, `-ed`, `-es`
/// and `-s` rules with consonant undoubling and silent-`e` restoration.
pub fn lemmatize(token: &str) -> String {
    let lower = token.to_lowercase();
    if let Some((_, lemma)) = EXCEPTIONS.iter().find(|(form, _)| *form == lower) {
        return (*lemma).to_owned();
    }
    if !lower.is_ascii() {
        return lower;
    }
    let w = lower.as_bytes();
    let n = w.len();

    if n > 4 && lower.ends_with("ing") {
        let stem = &w[..n - 3];
        if stem.len() >= 2 && has_vowel(stem) {
            return restore(stem);
        }
        return lower;
    }
    if n > 4 && lower.ends_with("ied") {
        return format!("{}y", &lower[..n - 3]);
    }
    if n > 3 && lower.ends_with("eed") {
        return lower[..n - 1].to_owned();
    }
    if n > 3 && lower.ends_with("ed") {
        let stem = &w[..n - 2];
        if stem.len() >= 2 && has_vowel(stem) {
            return restore(stem);
        }
        return lower;
    }
    if n > 4 && lower.ends_with("ies") {
        return format!("{}y", &lower[..n - 3]);
    }
    if n > 3 && lower.ends_with("es") {
        let stem = &lower[..n - 2];
        if stem.ends_with("ss")
            || stem.ends_with('x')
            || stem.ends_with("zz")
            || stem.ends_with("ch")
            || stem.ends_with("sh")
        {
            return stem.to_owned();
        }
        return lower[..n - 1].to_owned();
    }
    if n > 3
        && lower.ends_with('s')
        && !lower.ends_with("ss")
        && !lower.ends_with("us")
        && !lower.ends_with("is")
    {
        return lower[..n - 1].to_owned();
    }
    lower
}
