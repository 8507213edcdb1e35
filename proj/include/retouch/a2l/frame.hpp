#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace retouch::a2l {

// Wire grammar, one frame per line:
//
//   A2L|1|<VERB>|<session>|<field>|...\n
//
// '|' -> "\|", '\' -> "\\", LF -> "\n", CR -> "\r" inside any part.
// A frame outside a session carries "-" in the session slot.

inline constexpr std::string_view kMagic = "A2L";
inline constexpr int kVersion = 1;
inline constexpr std::string_view kNoSession = "-";

enum class Verb { hello, welcome, file, fileok, exec, status, result, err, bye };

const char* verb_name(Verb verb);
std::optional<Verb> verb_from(std::string_view name);

struct Frame {
  Verb verb = Verb::hello;
  std::string session{kNoSession};
  std::vector<std::string> fields;
  bool operator==(const Frame&) const = default;
};

enum class FrameErrc { bad_magic, bad_version, unknown_verb, bad_escape, bad_frame };

class FrameError : public std::runtime_error {
 public:
  FrameError(FrameErrc code, const std::string& message);
  FrameErrc code() const { return code_; }

 private:
  FrameErrc code_;
};

/// Newline-terminated wire form; decode_frame(encode_frame(f)) == f.
std::string encode_frame(const Frame& frame);

/// Total parse of one line (the trailing newline is optional).
Frame decode_frame(std::string_view line);

// Convenience constructors.
Frame make_frame(Verb verb, std::string session, std::vector<std::string> fields = {});
Frame make_error(std::string session, std::string code, std::string message);

}  // namespace retouch::a2l
