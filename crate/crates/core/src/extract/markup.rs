//! Removal of database-specific formatting from record bodies.

use super::FormatKind;

/// Strips the source format's markup from a record-body fragment.
///
/// Line prefixes, `-!-` topic sigils and `{...}` control lines are removed
/// and continuation lines are joined with one space. XML tags are deleted
/// with their inner text kept and entities decoded. Everything else keeps
/// its original order.
pub fn strip_markup(raw: &str, format: FormatKind) -> String {
    match format {
        FormatKind::LinePrefixedFlat => strip_prefixed_lines(raw, None),
        FormatKind::XmlAbstract => strip_tags(raw),
        FormatKind::KeyedBlock => join_lines(raw.lines().filter(|l| !is_brace_line(l))),
        FormatKind::GenericTsv => raw.to_owned(),
    }
}

/// Joins line-prefixed annotation lines. With `prefix` unset, any leading
/// two-letter upper-case line code followed by a space is removed.
pub(crate) fn strip_prefixed_lines(raw: &str, prefix: Option<&str>) -> String {
    join_lines(raw.lines().map(|line| {
        let rest = match prefix {
            Some(p) => line.strip_prefix(p).unwrap_or(line),
            None => strip_line_code(line),
        };
        let rest = rest.trim_start();
        rest.strip_prefix("-!-").unwrap_or(rest)
    }))
}

fn strip_line_code(line: &str) -> &str {
    let b = line.as_bytes();
    let code = b.len() >= 2 && b[0].is_ascii_uppercase() && b[1].is_ascii_uppercase();
    if code && (b.len() == 2 || b[2] == b' ' || b[2] == b'\t') {
        &line[2..]
    } else {
        line
    }
}

fn join_lines<'a>(lines: impl Iterator<Item = &'a str>) -> String {
    let mut out = String::new();
    for piece in lines.map(str::trim).filter(|p| !p.is_empty()) {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(piece);
    }
    out
}

pub(crate) fn is_brace_line(line: &str) -> bool {
    let t = line.trim();
    t.len() >= 2 && t.starts_with('{') && t.ends_with('}')
}

fn strip_tags(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut rest = raw;
    while let Some(lt) = rest.find('<') {
        out.push_str(&decode_entities(&rest[..lt]));
        let tail = &rest[lt..];
        if let Some(body) = tail.strip_prefix("<![CDATA[") {
            let end = body.find("]]>").unwrap_or(body.len());
            out.push_str(&body[..end]);
            rest = body.get(end + 3..).unwrap_or("");
        } else if let Some(body) = tail.strip_prefix("<!--") {
            rest = body.find("-->").map_or("", |e| &body[e + 3..]);
        } else {
            rest = tail.find('>').map_or("", |gt| &tail[gt + 1..]);
        }
    }
    out.push_str(&decode_entities(rest));
    out
}

pub(crate) fn decode_entities(text: &str) -> String {
    if !text.contains('&') {
        return text.to_owned();
    }
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        let tail = &rest[amp..];
        let decoded = tail.find(';').filter(|&semi| semi <= 10).and_then(|semi| {
            let c = match &tail[1..semi] {
                "amp" => Some('&'),
                "lt" => Some('<'),
                "gt" => Some('>'),
                "quot" => Some('"'),
                "apos" => Some('\''),
                "nbsp" => Some('\u{a0}'),
                num => num
                    .strip_prefix("#x")
                    .or_else(|| num.strip_prefix("#X"))
                    .and_then(|h| u32::from_str_radix(h, 16).ok())
                    .or_else(|| num.strip_prefix('#').and_then(|d| d.parse().ok()))
                    .and_then(char::from_u32),
            };
            c.map(|c| (c, semi))
        });
        match decoded {
            Some((c, semi)) => {
                out.push(c);
                rest = &tail[semi + 1..];
            }
            None => {
                out.push('&');
                rest = &tail[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_comment_block_is_joined() {
        let raw = "CC -!- FUNCTION: May be a transcription factor with important functions\nCC     in eye and nasal development.";
        assert_eq!(
            strip_markup(raw, FormatKind::LinePrefixedFlat),
            "FUNCTION: May be a transcription factor with important functions in eye and nasal development."
        );
    }

    #[test]
    fn xml_tags_are_deleted_inner_text_kept() {
        assert_eq!(strip_markup("<i>E. coli</i> pili", FormatKind::XmlAbstract), "E. coli pili");
        assert_eq!(
            strip_markup("a &lt;b&gt; <!-- note --><![CDATA[x<y]]> &#65;&unknown;", FormatKind::XmlAbstract),
            "a <b> x<y A&unknown;"
        );
    }

    #[test]
    fn markup_free_text_is_unchanged() {
        let plain = "Binds DNA in the nucleus.";
        for format in FormatKind::ALL {
            assert_eq!(strip_markup(plain, format), plain, "{format}");
        }
    }

    #[test]
    fn keyed_block_drops_control_lines() {
        let raw = "{BEGIN}\nThe motif\nbinds zinc.\n{END}";
        assert_eq!(strip_markup(raw, FormatKind::KeyedBlock), "The motif binds zinc.");
    }

    #[test]
    fn explicit_prefix_is_honoured() {
        assert_eq!(strip_prefixed_lines("XX -!- A: b\nXX   c", Some("XX")), "A: b c");
    }
}
