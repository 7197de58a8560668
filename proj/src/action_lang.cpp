#include "souschef/action_lang.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>

namespace souschef::lang {

namespace {

struct FunctionInfo {
  ApiFunction fn;
  const char* name;
  ApiSignature sig;
};

constexpr std::array<FunctionInfo, 10> kFunctions = {{
    {ApiFunction::OpenGripper, "open_gripper", {1, 1, true}},
    {ApiFunction::MoveToObject, "move_to_object", {2, 2, true}},
    {ApiFunction::Grasp, "grasp", {2, 2, true}},
    {ApiFunction::Cut, "cut", {2, 2, true}},
    {ApiFunction::Pour, "pour", {2, 2, true}},
    {ApiFunction::Put, "put", {2, 2, true}},
    {ApiFunction::Toss, "toss", {2, 2, true}},
    {ApiFunction::CutAndPutIn, "cut_and_put_in", {2, 2, true}},
    {ApiFunction::GetListOfObjects, "get_list_of_objects", {0, 0, false}},
    {ApiFunction::GetBoundingBoxes, "get_bounding_boxes", {0, 1, false}},
}};

// Keywords that make a line a control-flow / assignment / import construct
// rather than a plain call.
constexpr std::array<const char*, 22> kForbiddenKeywords = {
    "for",    "while",  "if",     "elif",  "else",   "import", "from",  "return",
    "lambda", "with",   "try",    "except", "finally", "class",  "assert", "yield",
    "global", "nonlocal", "del",  "pass",  "raise",  "break",
};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_object_token(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    if (!ok) return false;
  }
  return true;
}

// One physical line with the comment removed. Quotes suppress '#'.
std::string strip_comment(std::string_view line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '\'' || c == '"') {
      quote = c;
    } else if (c == '#') {
      return std::string(line.substr(0, i));
    }
  }
  return std::string(line);
}

std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// First identifier on the line, if any.
std::string leading_identifier(std::string_view s) {
  std::size_t i = 0;
  if (i >= s.size() || !is_ident_start(s[i])) return {};
  std::size_t b = i;
  while (i < s.size() && is_ident_char(s[i])) ++i;
  return std::string(s.substr(b, i - b));
}

bool has_assignment_outside_quotes(std::string_view s) {
  char quote = 0;
  for (char c : s) {
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '\'' || c == '"') {
      quote = c;
    } else if (c == '=') {
      return true;
    }
  }
  return false;
}

ValidationError err(ValidationError::Code code, int line, int column, std::string msg) {
  return {code, {line, column}, std::move(msg)};
}

struct ParsedLine {
  std::string name;
  std::vector<std::string> args;
  int name_column = 1;
};

// identifier '(' [quoted {',' quoted}] ')' with nothing but whitespace after.
Result<ParsedLine, ValidationError> parse_call_line(std::string_view body, int line_no,
                                                    int base_col) {
  ParsedLine out;
  std::size_t i = 0;
  auto column = [&](std::size_t pos) { return base_col + static_cast<int>(pos); };

  if (i >= body.size() || !is_ident_start(body[i]))
    return err(ValidationError::Code::SyntaxError, line_no, column(i), "expected a function name");
  const std::size_t name_begin = i;
  while (i < body.size() && is_ident_char(body[i])) ++i;
  out.name = std::string(body.substr(name_begin, i - name_begin));
  out.name_column = column(name_begin);

  while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i]))) ++i;
  if (i >= body.size() || body[i] != '(')
    return err(ValidationError::Code::SyntaxError, line_no, column(i),
               "expected '(' after function name");
  ++i;

  bool expect_arg = false;
  while (true) {
    while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i]))) ++i;
    if (i >= body.size())
      return err(ValidationError::Code::SyntaxError, line_no, column(i), "unterminated call");
    if (body[i] == ')' && !expect_arg) {
      ++i;
      break;
    }
    if (body[i] != '\'' && body[i] != '"')
      return err(ValidationError::Code::SyntaxError, line_no, column(i),
                 "arguments must be quoted strings");
    const char quote = body[i];
    ++i;
    const std::size_t arg_begin = i;
    while (i < body.size() && body[i] != quote && body[i] != '\n') ++i;
    if (i >= body.size() || body[i] != quote)
      return err(ValidationError::Code::SyntaxError, line_no, column(i),
                 "unterminated string literal");
    out.args.emplace_back(body.substr(arg_begin, i - arg_begin));
    ++i;
    while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i]))) ++i;
    if (i < body.size() && body[i] == ',') {
      ++i;
      expect_arg = true;
      continue;
    }
    if (i < body.size() && body[i] == ')') {
      ++i;
      break;
    }
    return err(ValidationError::Code::SyntaxError, line_no, column(i),
               "expected ',' or ')' after argument");
  }

  if (!trim(body.substr(i)).empty())
    return err(ValidationError::Code::SyntaxError, line_no, column(i),
               "unexpected text after call");
  return out;
}

}  // namespace

const char* function_name(ApiFunction f) {
  for (const auto& info : kFunctions)
    if (info.fn == f) return info.name;
  return "?";
}

std::optional<ApiFunction> function_from_name(std::string_view name) {
  for (const auto& info : kFunctions)
    if (name == info.name) return info.fn;
  return std::nullopt;
}

ApiSignature signature(ApiFunction f) {
  for (const auto& info : kFunctions)
    if (info.fn == f) return info.sig;
  return {0, 0, false};
}

const char* to_string(ValidationError::Code c) {
  switch (c) {
    case ValidationError::Code::MissingTags: return "MissingTags";
    case ValidationError::Code::DuplicateTags: return "DuplicateTags";
    case ValidationError::Code::UnknownFunction: return "UnknownFunction";
    case ValidationError::Code::BadArity: return "BadArity";
    case ValidationError::Code::BadArgumentType: return "BadArgumentType";
    case ValidationError::Code::UnsupportedConstruct: return "UnsupportedConstruct";
    case ValidationError::Code::UnknownObjectName: return "UnknownObjectName";
    case ValidationError::Code::SyntaxError: return "SyntaxError";
  }
  return "?";
}

Result<PlanDocument, ValidationError> parse_plan(std::string_view text) {
  static constexpr std::string_view kStart = "[start of plan]";
  static constexpr std::string_view kEnd = "[end of plan]";

  auto count_occurrences = [&](std::string_view needle, std::size_t& first) {
    int n = 0;
    first = std::string_view::npos;
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string_view::npos) {
      if (n == 0) first = pos;
      ++n;
      pos += needle.size();
    }
    return n;
  };

  std::size_t start_pos = 0, end_pos = 0;
  const int starts = count_occurrences(kStart, start_pos);
  const int ends = count_occurrences(kEnd, end_pos);
  if (starts == 0 || ends == 0)
    return err(ValidationError::Code::MissingTags, 0, 0,
               "plan must contain one [start of plan] and one [end of plan] tag");
  if (starts > 1 || ends > 1)
    return err(ValidationError::Code::DuplicateTags, 0, 0, "plan tags appear more than once");
  if (end_pos < start_pos)
    return err(ValidationError::Code::MissingTags, 0, 0,
               "[end of plan] appears before [start of plan]");

  const std::size_t body_begin = start_pos + kStart.size();
  const std::string_view body = text.substr(body_begin, end_pos - body_begin);

  PlanDocument doc;
  doc.raw = std::string(text);
  std::size_t pos = 0;
  while (pos <= body.size()) {
    const std::size_t nl = body.find('\n', pos);
    const std::string_view line =
        body.substr(pos, nl == std::string_view::npos ? body.size() - pos : nl - pos);
    const std::string_view t = trim(line);
    if (!t.empty()) doc.steps.emplace_back(t);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  if (doc.steps.empty())
    return err(ValidationError::Code::SyntaxError, 0, 0, "plan body contains no steps");
  return doc;
}

Result<ActionProgram, ValidationError> parse_program(std::string_view source) {
  ActionProgram program;
  bool seen_header = false;
  bool seen_call = false;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= source.size()) {
    ++line_no;
    const std::size_t nl = source.find('\n', pos);
    const std::string_view raw_line =
        source.substr(pos, nl == std::string_view::npos ? source.size() - pos : nl - pos);
    pos = (nl == std::string_view::npos) ? source.size() + 1 : nl + 1;

    const std::string no_comment = strip_comment(raw_line);
    const std::string_view body = trim(no_comment);
    if (body.empty()) continue;
    const int base_col =
        1 + static_cast<int>(body.data() - no_comment.data());

    const std::string keyword = to_lower(leading_identifier(body));
    for (const char* bad : kForbiddenKeywords) {
      if (keyword == bad)
        return err(ValidationError::Code::UnsupportedConstruct, line_no, base_col,
                   "construct '" + keyword + "' is not allowed");
    }
    if (keyword == "def") {
      if (!seen_header && !seen_call && body.back() == ':') {
        seen_header = true;
        continue;
      }
      return err(ValidationError::Code::UnsupportedConstruct, line_no, base_col,
                 "only a single leading definition header is allowed");
    }
    if (has_assignment_outside_quotes(body))
      return err(ValidationError::Code::UnsupportedConstruct, line_no, base_col,
                 "assignments and comparisons are not allowed");
    if (body.back() == ':' && !seen_header && !seen_call) {
      // Header line without the def keyword.
      seen_header = true;
      continue;
    }

    auto parsed = parse_call_line(body, line_no, base_col);
    if (!parsed.ok()) return parsed.error();

    const auto fn = function_from_name(parsed->name);
    if (!fn)
      return err(ValidationError::Code::UnknownFunction, line_no, parsed->name_column,
                 "unknown function '" + parsed->name + "'");
    const ApiSignature sig = signature(*fn);
    const int argc = static_cast<int>(parsed->args.size());
    if (argc < sig.min_args || argc > sig.max_args) {
      std::ostringstream msg;
      msg << parsed->name << " takes ";
      if (sig.min_args == sig.max_args)
        msg << sig.min_args;
      else
        msg << sig.min_args << " to " << sig.max_args;
      msg << " argument(s), got " << argc;
      return err(ValidationError::Code::BadArity, line_no, parsed->name_column, msg.str());
    }

    ApiCall call;
    call.function = *fn;
    call.span = {line_no, parsed->name_column};
    std::size_t obj_index = 0;
    if (sig.manipulator_first) {
      const std::string m = to_lower(trim(parsed->args[0]));
      const auto manip = manipulator_from_token(m);
      if (!manip)
        return err(ValidationError::Code::BadArgumentType, line_no, parsed->name_column,
                   "manipulator must be 'gripper' or 'tool', got '" + parsed->args[0] + "'");
      call.manipulator = *manip;
      obj_index = 1;
    }
    if (parsed->args.size() > obj_index) {
      const std::string token = to_lower(trim(parsed->args[obj_index]));
      if (!is_object_token(token))
        return err(ValidationError::Code::BadArgumentType, line_no, parsed->name_column,
                   "object name must be a lowercase token, got '" + parsed->args[obj_index] + "'");
      call.object = token;
    }
    program.calls.push_back(std::move(call));
    seen_call = true;
  }

  if (program.calls.empty())
    return err(ValidationError::Code::SyntaxError, line_no, 1, "program contains no calls");
  return program;
}

std::string serialize_call(const ApiCall& call) {
  std::string out = function_name(call.function);
  out += '(';
  bool first = true;
  auto push = [&](const std::string& arg) {
    if (!first) out += ", ";
    out += '\'';
    out += arg;
    out += '\'';
    first = false;
  };
  if (call.manipulator) push(manipulator_token(*call.manipulator));
  if (call.object) push(*call.object);
  out += ')';
  return out;
}

std::string serialize_program(const ActionProgram& program) {
  std::string out;
  for (const auto& call : program.calls) {
    out += serialize_call(call);
    out += '\n';
  }
  return out;
}

SceneCheck validate_against_scene(const ActionProgram& program,
                                  const std::set<std::string>& known_objects) {
  SceneCheck check;
  for (const auto& call : program.calls) {
    if (!call.object) continue;
    const std::string& name = *call.object;
    if (name == "cutting_board" || name == "bowl") continue;
    if (known_objects.count(name)) continue;
    check.violations.push_back(err(ValidationError::Code::UnknownObjectName, call.span.line,
                                   call.span.column,
                                   "object '" + name + "' is not present in the scene"));
  }
  return check;
}

}  // namespace souschef::lang
