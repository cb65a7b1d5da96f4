#include <fstream>
#include <json.hpp>
#include <sstream>

#include "repoctx/context_graph.hpp"
#include "repoctx/error.hpp"

namespace repoctx {

namespace {

constexpr std::string_view kMagic = "REPOCTX-GRAPH";

using nlohmann::json;

json entity_to_json(const CodeEntity& e) {
  json j{{"kind", kind_name(e.kind)},
         {"name", e.name},
         {"qualified_path", e.qualified_path},
         {"file_path", e.file_path},
         {"start_line", e.start_line},
         {"end_line", e.end_line}};
  if (!e.signature.empty()) j["signature"] = e.signature;
  if (e.docstring) j["docstring"] = *e.docstring;
  if (!e.body.empty()) j["body"] = e.body;
  if (!e.body_indent.empty()) j["body_indent"] = e.body_indent;
  if (!e.aliases.empty()) j["aliases"] = e.aliases;
  if (e.synthetic) j["synthetic"] = true;
  return j;
}

CodeEntity entity_from_json(const json& j) {
  CodeEntity e;
  auto kind = parse_kind(j.at("kind").get<std::string>());
  if (!kind) throw FormatError("unknown entity kind");
  e.kind = *kind;
  e.name = j.at("name").get<std::string>();
  e.qualified_path = j.at("qualified_path").get<std::string>();
  e.file_path = j.at("file_path").get<std::string>();
  e.start_line = j.at("start_line").get<std::uint32_t>();
  e.end_line = j.at("end_line").get<std::uint32_t>();
  e.signature = j.value("signature", std::string());
  if (j.contains("docstring")) e.docstring = j.at("docstring").get<std::string>();
  e.body = j.value("body", std::string());
  e.body_indent = j.value("body_indent", std::string());
  e.aliases = j.value("aliases", std::vector<std::string>{});
  e.synthetic = j.value("synthetic", false);
  return e;
}

}  // namespace

std::string serialize_graph(const ContextGraph& graph) {
  json entities = json::array();
  json depends = json::array();
  for (EntityId i = 0; i < graph.size(); ++i) {
    json e = entity_to_json(graph.entity(i));
    if (auto p = graph.parent(i)) e["parent"] = *p;
    entities.push_back(std::move(e));
    for (EntityId d : graph.depends(i)) depends.push_back({i, d});
  }
  json diagnostics = json::array();
  for (const auto& d : graph.diagnostics()) {
    diagnostics.push_back({{"severity", d.severity == Diagnostic::Severity::Error ? "error" : "warning"},
                           {"kind", d.kind},
                           {"file", d.file},
                           {"line", d.line},
                           {"message", d.message}});
  }
  json doc{{"format_version", kGraphFormatVersion},
           {"root", graph.root()},
           {"entities", std::move(entities)},
           {"depends", std::move(depends)},
           {"diagnostics", std::move(diagnostics)}};
  std::string out(kMagic);
  out += '\n';
  out += doc.dump(1);
  out += '\n';
  return out;
}

ContextGraph deserialize_graph(std::string_view data) {
  if (!data.starts_with(kMagic) || data.size() <= kMagic.size() || data[kMagic.size()] != '\n') {
    throw FormatError("not a graph file");
  }
  json doc;
  try {
    doc = json::parse(data.substr(kMagic.size() + 1));
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("corrupt graph file: ") + e.what());
  }
  try {
    const int version = doc.at("format_version").get<int>();
    if (version != kGraphFormatVersion) {
      throw FormatError("graph format version " + std::to_string(version) + ", expected " +
                        std::to_string(kGraphFormatVersion));
    }
    ContextGraph g;
    g.set_root(doc.value("root", std::string()));
    const auto& entities = doc.at("entities");
    for (const auto& j : entities) {
      std::optional<EntityId> parent;
      if (j.contains("parent")) {
        parent = j.at("parent").get<EntityId>();
        if (*parent >= g.size()) throw FormatError("parent precedes child");
      }
      g.add_entity(entity_from_json(j), parent);
    }
    for (const auto& d : doc.at("depends")) {
      const auto a = d.at(0).get<EntityId>();
      const auto b = d.at(1).get<EntityId>();
      if (a >= g.size() || b >= g.size()) throw FormatError("depends edge out of range");
      g.add_depends(a, b);
    }
    for (const auto& d : doc.at("diagnostics")) {
      g.add_diagnostic({d.at("severity").get<std::string>() == "error" ? Diagnostic::Severity::Error
                                                                       : Diagnostic::Severity::Warning,
                        d.at("kind").get<std::string>(), d.at("file").get<std::string>(),
                        d.at("line").get<std::uint32_t>(), d.at("message").get<std::string>()});
    }
    g.finalize();
    return g;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed graph file: ") + e.what());
  }
}

void save_graph(const ContextGraph& graph, const std::filesystem::path& path) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << serialize_graph(graph);
    if (!out) throw std::runtime_error("cannot write " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

ContextGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_graph(ss.str());
}

}  // namespace repoctx
