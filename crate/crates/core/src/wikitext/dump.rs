//! Streaming dump ingestion.
//!
//! Two input layouts are accepted and auto-detected from the first
//! non-whitespace byte: a MediaWiki XML export subset ('<') and JSON lines
//! ('{'). Both paths hold one page in memory at a time.

use super::{RawPage, WikitextError};
use quick_xml::events::Event;
use quick_xml::Reader;
use serde::Deserialize;
use std::io::BufRead;

/// Iterator over the pages of a dump.
pub struct DumpReader<R: BufRead> {
    inner: Inner<R>,
}

enum Inner<R: BufRead> {
    Xml(XmlPages<R>),
    JsonLines(JsonLines<R>),
}

/// Opens a dump stream, detecting its format from the first non-whitespace
/// byte. Pages are yielded in file order; namespace filtering is left to the
/// caller.
pub fn parse_dump<R: BufRead>(mut reader: R) -> Result<DumpReader<R>, WikitextError> {
    let first = loop {
        let buf = reader.fill_buf()?;
        if buf.is_empty() {
            break None;
        }
        match buf.iter().position(|b| !b.is_ascii_whitespace()) {
            Some(pos) => break Some(buf[pos]),
            None => {
                let len = buf.len();
                reader.consume(len);
            }
        }
    };
    let inner = match first {
        Some(b'<') => Inner::Xml(XmlPages::new(reader)),
        Some(b'{') => Inner::JsonLines(JsonLines::new(reader)),
        Some(byte) => {
            return Err(WikitextError::Malformed {
                offset: 0,
                pages_complete: 0,
                detail: format!("unrecognized dump format (first byte {:#04x})", byte),
            })
        }
        None => {
            // empty input: an empty JSON-lines dump
            Inner::JsonLines(JsonLines::new(reader))
        }
    };
    Ok(DumpReader { inner })
}

impl<R: BufRead> Iterator for DumpReader<R> {
    type Item = Result<RawPage, WikitextError>;

    fn next(&mut self) -> Option<Self::Item> {
        match &mut self.inner {
            Inner::Xml(pages) => pages.next(),
            Inner::JsonLines(lines) => lines.next(),
        }
    }
}

/// State machine over the XML export subset: page, title, ns,
/// revision/text. Everything else is skipped.
struct XmlPages<R: BufRead> {
    reader: Reader<R>,
    buf: Vec<u8>,
    pages_complete: usize,
    done: bool,
}

#[derive(Default)]
struct PartialPage {
    title: String,
    namespace: i32,
    text: String,
}

impl<R: BufRead> XmlPages<R> {
    fn new(source: R) -> Self {
        let mut reader = Reader::from_reader(source);
        reader.check_end_names(false);
        Self {
            reader,
            buf: Vec::new(),
            pages_complete: 0,
            done: false,
        }
    }

    fn malformed(&self, detail: String) -> WikitextError {
        WikitextError::Malformed {
            offset: self.reader.buffer_position() as u64,
            pages_complete: self.pages_complete,
            detail,
        }
    }
}

impl<R: BufRead> Iterator for XmlPages<R> {
    type Item = Result<RawPage, WikitextError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let mut current: Option<PartialPage> = None;
        // which text-bearing element we are inside, if any
        let mut field: Option<&'static str> = None;
        loop {
            self.buf.clear();
            let event = match self.reader.read_event_into(&mut self.buf) {
                Ok(event) => event,
                Err(error) => {
                    self.done = true;
                    return Some(Err(self.malformed(error.to_string())));
                }
            };
            match event {
                Event::Start(start) => match start.name().as_ref() {
                    b"page" => current = Some(PartialPage::default()),
                    b"title" if current.is_some() => field = Some("title"),
                    b"ns" if current.is_some() => field = Some("ns"),
                    b"text" if current.is_some() => field = Some("text"),
                    _ => field = None,
                },
                Event::Text(text) => {
                    if let (Some(page), Some(name)) = (current.as_mut(), field) {
                        let chunk = match text.unescape() {
                            Ok(chunk) => chunk,
                            Err(error) => {
                                self.done = true;
                                return Some(Err(self.malformed(error.to_string())));
                            }
                        };
                        match name {
                            "title" => page.title.push_str(&chunk),
                            "text" => page.text.push_str(&chunk),
                            "ns" => page.namespace = chunk.trim().parse().unwrap_or(0),
                            _ => {}
                        }
                    }
                }
                Event::CData(data) => {
                    if let (Some(page), Some("text")) = (current.as_mut(), field) {
                        page.text.push_str(&String::from_utf8_lossy(&data));
                    }
                }
                Event::End(end) => match end.name().as_ref() {
                    b"page" => {
                        if let Some(page) = current.take() {
                            if page.title.is_empty() {
                                self.done = true;
                                return Some(Err(
                                    self.malformed("page element without a title".to_string())
                                ));
                            }
                            self.pages_complete += 1;
                            return Some(Ok(RawPage {
                                title: page.title,
                                namespace: page.namespace,
                                text: page.text,
                            }));
                        }
                    }
                    _ => field = None,
                },
                Event::Eof => {
                    self.done = true;
                    if current.is_some() {
                        return Some(Err(WikitextError::Truncated {
                            offset: self.reader.buffer_position() as u64,
                            pages_complete: self.pages_complete,
                        }));
                    }
                    return None;
                }
                _ => {}
            }
        }
    }
}

#[derive(Deserialize)]
struct JsonPage {
    title: String,
    #[serde(default)]
    ns: i32,
    #[serde(default)]
    text: String,
}

struct JsonLines<R: BufRead> {
    reader: R,
    offset: u64,
    pages_complete: usize,
    line: String,
    done: bool,
}

impl<R: BufRead> JsonLines<R> {
    fn new(reader: R) -> Self {
        Self {
            reader,
            offset: 0,
            pages_complete: 0,
            line: String::new(),
            done: false,
        }
    }
}

impl<R: BufRead> Iterator for JsonLines<R> {
    type Item = Result<RawPage, WikitextError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        loop {
            self.line.clear();
            let line_start = self.offset;
            match self.reader.read_line(&mut self.line) {
                Ok(0) => {
                    self.done = true;
                    return None;
                }
                Ok(read) => self.offset += read as u64,
                Err(error) => {
                    self.done = true;
                    return Some(Err(error.into()));
                }
            }
            if self.line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<JsonPage>(self.line.trim_end()) {
                Ok(page) => {
                    self.pages_complete += 1;
                    return Some(Ok(RawPage {
                        title: page.title,
                        namespace: page.ns,
                        text: page.text,
                    }));
                }
                Err(error) => {
                    self.done = true;
                    return Some(Err(WikitextError::Malformed {
                        offset: line_start,
                        pages_complete: self.pages_complete,
                        detail: error.to_string(),
                    }));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const XML: &str = r#"<mediawiki>
  <siteinfo><sitename>Test</sitename></siteinfo>
  <page>
    <title>Nature</title>
    <ns>0</ns>
    <revision><id>1</id><text>A [[B]]</text></revision>
  </page>
  <page>
    <title>Talk:Nature</title>
    <ns>1</ns>
    <revision><text>chatter</text></revision>
  </page>
</mediawiki>"#;

    #[test]
    fn xml_pages_in_order() {
        let pages: Vec<RawPage> = parse_dump(XML.as_bytes())
            .unwrap()
            .collect::<Result<_, _>>()
            .unwrap();
        assert_eq!(pages.len(), 2);
        assert_eq!(pages[0].title, "Nature");
        assert_eq!(pages[0].namespace, 0);
        assert_eq!(pages[0].text, "A [[B]]");
        assert_eq!(pages[1].namespace, 1);
    }

    #[test]
    fn json_lines_mapping() {
        let input = "{\"title\":\"Nature\",\"ns\":0,\"text\":\"x\"}\n\n{\"title\":\"B\"}\n";
        let pages: Vec<RawPage> = parse_dump(input.as_bytes())
            .unwrap()
            .collect::<Result<_, _>>()
            .unwrap();
        assert_eq!(pages.len(), 2);
        assert_eq!(pages[0].title, "Nature");
        assert_eq!(pages[0].namespace, 0);
        assert_eq!(pages[1].text, "");
    }

    #[test]
    fn truncated_xml_names_last_complete_page() {
        let cut = &XML[..XML.find("<title>Talk:").unwrap() + 20];
        let results: Vec<_> = parse_dump(cut.as_bytes()).unwrap().collect();
        assert!(results[0].is_ok());
        match results.last().unwrap() {
            Err(WikitextError::Truncated { pages_complete, .. }) => {
                assert_eq!(*pages_complete, 1)
            }
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_json_line_reports_offset() {
        let input = "{\"title\":\"A\"}\nnot json\n";
        let results: Vec<_> = parse_dump(input.as_bytes()).unwrap().collect();
        assert!(results[0].is_ok());
        match &results[1] {
            Err(WikitextError::Malformed {
                offset,
                pages_complete,
                ..
            }) => {
                assert_eq!(*offset, 14);
                assert_eq!(*pages_complete, 1);
            }
            other => panic!("expected malformed error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_format_rejected() {
        assert!(matches!(
            parse_dump("plain text".as_bytes()),
            Err(WikitextError::Malformed { .. })
        ));
    }
}
