#include "repoctx/imports.hpp"

namespace repoctx {

namespace {

void parse_module_name(const SyntaxNode& n, ImportBinding& b) {
  if (n.is("relative_import")) {
    for (const auto& part : n.children()) {
      if (part.is("import_prefix")) {
        for (const auto& dot : part.children()) {
          if (dot.is(".")) ++b.level;
        }
      } else if (part.is("dotted_name")) {
        b.module = dotted_name(part).value_or("");
      }
    }
    return;
  }
  b.module = dotted_name(n).value_or(std::string(n.text()));
}

void add_imported_name(const SyntaxNode& n, const ImportBinding& proto, std::vector<ImportBinding>& out) {
  ImportBinding b = proto;
  if (n.is("aliased_import")) {
    auto name = n.field("name");
    auto alias = n.field("alias");
    if (!name || !alias) return;
    b.aliased = true;
    b.alias = std::string(alias->text());
    if (b.from_import) {
      b.name = dotted_name(*name).value_or("");
    } else {
      b.module = dotted_name(*name).value_or("");
    }
  } else if (n.is("dotted_name") || n.is("identifier")) {
    auto dotted = dotted_name(n);
    if (!dotted) return;
    if (b.from_import) {
      b.name = *dotted;
      b.alias = *dotted;
    } else {
      b.module = *dotted;
      b.alias = dotted->substr(0, dotted->find('.'));
    }
  } else if (n.is("wildcard_import")) {
    b.name = "*";
    b.alias = "*";
  } else {
    return;
  }
  if (b.alias.empty() || (!b.from_import && b.module.empty())) return;
  out.push_back(std::move(b));
}

// Joins identifier and '.' tokens starting at `i` into a dotted string.
std::string join_dotted(std::span<const SyntaxNode> seg, std::size_t& i) {
  std::string out;
  while (i < seg.size()) {
    const auto& n = seg[i];
    if (n.is("identifier") || n.is("dotted_name")) {
      out += dotted_name(n).value_or("");
    } else if (n.is(".")) {
      out += '.';
    } else {
      break;
    }
    ++i;
  }
  while (!out.empty() && out.back() == '.') out.pop_back();
  return out;
}

}  // namespace

std::vector<ImportBinding> bindings_of(const SyntaxNode& statement) {
  std::vector<ImportBinding> out;
  ImportBinding proto;
  proto.line = statement.line();
  if (statement.is("import_statement")) {
    for (const auto& n : statement.fields("name")) add_imported_name(n, proto, out);
  } else if (statement.is("import_from_statement")) {
    proto.from_import = true;
    auto module = statement.field("module_name");
    if (!module) return out;
    parse_module_name(*module, proto);
    bool seen_import = false;
    for (std::uint32_t i = 0; i < statement.child_count(); ++i) {
      const auto c = statement.child(i);
      if (c.is("import")) {
        seen_import = true;
        continue;
      }
      if (!seen_import) continue;
      if (statement.field_name_for_child(i) == "name" || c.is("wildcard_import")) add_imported_name(c, proto, out);
    }
  }
  return out;
}

std::vector<ImportBinding> salvage_import(std::span<const SyntaxNode> seg) {
  std::vector<ImportBinding> out;
  if (seg.empty()) return out;
  ImportBinding proto;
  proto.line = seg.front().line();
  std::size_t i = 0;
  if (seg[0].is("from")) {
    proto.from_import = true;
    i = 1;
    while (i < seg.size() && (seg[i].is(".") || seg[i].is("import_prefix") || seg[i].is("relative_import"))) {
      if (seg[i].is(".")) {
        ++proto.level;
      } else {
        ImportBinding tmp;
        parse_module_name(seg[i], tmp);
        if (seg[i].is("import_prefix")) {
          for (const auto& d : seg[i].children()) proto.level += d.is(".") ? 1 : 0;
        } else {
          proto.level += tmp.level;
          proto.module = tmp.module;
        }
      }
      ++i;
    }
    if (proto.module.empty()) proto.module = join_dotted(seg, i);
    if (i >= seg.size() || !seg[i].is("import")) return out;
    ++i;
  } else if (seg[0].is("import")) {
    i = 1;
  } else {
    return out;
  }
  for (; i < seg.size(); ++i) {
    const auto& n = seg[i];
    if (n.is("identifier") && !proto.from_import) {
      std::size_t j = i;
      std::string dotted = join_dotted(seg, j);
      if (!dotted.empty()) {
        ImportBinding b = proto;
        b.module = dotted;
        b.alias = dotted.substr(0, dotted.find('.'));
        out.push_back(std::move(b));
      }
      i = j - 1;
      continue;
    }
    add_imported_name(n, proto, out);
  }
  return out;
}

std::vector<ImportBinding> extract_imports(const SyntaxTree& tree) {
  std::vector<ImportBinding> out;
  walk(tree, [&](const SyntaxNode& n) {
    if (n.is("import_statement") || n.is("import_from_statement")) {
      auto b = bindings_of(n);
      out.insert(out.end(), b.begin(), b.end());
    } else if (n.is_error()) {
      for (const auto& seg : error_segments(n)) {
        auto b = salvage_import(seg);
        out.insert(out.end(), b.begin(), b.end());
      }
    }
  });
  return out;
}

std::optional<ImportTarget> import_target(const ImportBinding& b, std::string_view usage) {
  if (b.star()) return std::nullopt;
  auto rooted = [&](std::string_view prefix) {
    return usage == prefix || (usage.size() > prefix.size() && usage.substr(0, prefix.size()) == prefix &&
                               usage[prefix.size()] == '.');
  };
  auto rest_after = [&](std::string_view prefix) {
    return usage.size() > prefix.size() ? std::string(usage.substr(prefix.size() + 1)) : std::string();
  };
  if (!rooted(b.alias)) return std::nullopt;
  ImportTarget t;
  t.level = b.level;
  if (b.from_import) {
    t.module = b.module;
    t.name = b.name + std::string(usage.substr(b.alias.size()));
    return t;
  }
  if (b.aliased || rooted(b.module)) {
    const std::string_view prefix = b.aliased ? std::string_view(b.alias) : std::string_view(b.module);
    t.module = b.module;
    t.name = rest_after(prefix);
    return t;
  }
  // `import a.b` exposes `a`; other members of the package hang off the top level.
  t.module = b.alias;
  t.name = rest_after(b.alias);
  return t;
}

}  // namespace repoctx
