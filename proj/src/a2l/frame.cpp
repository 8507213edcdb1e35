#include "retouch/a2l/frame.hpp"

namespace retouch::a2l {

const char* verb_name(Verb verb) {
  switch (verb) {
    case Verb::hello: return "HELLO";
    case Verb::welcome: return "WELCOME";
    case Verb::file: return "FILE";
    case Verb::fileok: return "FILEOK";
    case Verb::exec: return "EXEC";
    case Verb::status: return "STATUS";
    case Verb::result: return "RESULT";
    case Verb::err: return "ERR";
    case Verb::bye: return "BYE";
  }
  return "?";
}

std::optional<Verb> verb_from(std::string_view name) {
  static constexpr Verb kAll[] = {Verb::hello, Verb::welcome, Verb::file,
                                  Verb::fileok, Verb::exec, Verb::status,
                                  Verb::result, Verb::err, Verb::bye};
  for (Verb v : kAll)
    if (name == verb_name(v)) return v;
  return std::nullopt;
}

namespace {

const char* frame_errc_name(FrameErrc code) {
  switch (code) {
    case FrameErrc::bad_magic: return "BadMagic";
    case FrameErrc::bad_version: return "BadVersion";
    case FrameErrc::unknown_verb: return "UnknownVerb";
    case FrameErrc::bad_escape: return "BadEscape";
    case FrameErrc::bad_frame: return "BadFrame";
  }
  return "?";
}

[[noreturn]] void fail(FrameErrc code, const std::string& message) {
  throw FrameError(code, message);
}

void escape_into(std::string& out, std::string_view part) {
  for (char c : part) {
    switch (c) {
      case '|': out += "\\|"; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
}

std::string unescape(std::string_view part) {
  std::string out;
  out.reserve(part.size());
  for (std::size_t i = 0; i < part.size(); ++i) {
    if (part[i] != '\\') {
      out += part[i];
      continue;
    }
    if (++i == part.size()) fail(FrameErrc::bad_escape, "dangling backslash");
    switch (part[i]) {
      case '|': out += '|'; break;
      case '\\': out += '\\'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      default:
        fail(FrameErrc::bad_escape,
             std::string("unknown escape '\\") + part[i] + "'");
    }
  }
  return out;
}

// Splits on unescaped bars, keeping parts escaped.
std::vector<std::string_view> split_bars(std::string_view line) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  bool escaped = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (escaped) {
      escaped = false;
    } else if (line[i] == '\\') {
      escaped = true;
    } else if (line[i] == '|') {
      parts.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  parts.push_back(line.substr(start));
  return parts;
}

}  // namespace

FrameError::FrameError(FrameErrc code, const std::string& message)
    : std::runtime_error(std::string(frame_errc_name(code)) + ": " + message),
      code_(code) {}

std::string encode_frame(const Frame& frame) {
  std::string out;
  out += kMagic;
  out += '|';
  out += std::to_string(kVersion);
  out += '|';
  out += verb_name(frame.verb);
  out += '|';
  escape_into(out, frame.session);
  for (const std::string& field : frame.fields) {
    out += '|';
    escape_into(out, field);
  }
  out += '\n';
  return out;
}

Frame decode_frame(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

  const auto parts = split_bars(line);
  if (parts.size() < 4) fail(FrameErrc::bad_frame, "frame needs at least 4 parts");
  if (parts[0] != kMagic)
    fail(FrameErrc::bad_magic, "expected 'A2L', got '" + std::string(parts[0]) + "'");
  if (parts[1] != std::to_string(kVersion))
    fail(FrameErrc::bad_version, "unsupported version '" + std::string(parts[1]) + "'");
  const auto verb = verb_from(parts[2]);
  if (!verb)
    fail(FrameErrc::unknown_verb, "verb '" + std::string(parts[2]) + "'");

  Frame frame;
  frame.verb = *verb;
  frame.session = unescape(parts[3]);
  for (std::size_t i = 4; i < parts.size(); ++i)
    frame.fields.push_back(unescape(parts[i]));
  return frame;
}

Frame make_frame(Verb verb, std::string session, std::vector<std::string> fields) {
  Frame f;
  f.verb = verb;
  f.session = std::move(session);
  f.fields = std::move(fields);
  return f;
}

Frame make_error(std::string session, std::string code, std::string message) {
  return make_frame(Verb::err, std::move(session),
                    {std::move(code), std::move(message)});
}

}  // namespace retouch::a2l
