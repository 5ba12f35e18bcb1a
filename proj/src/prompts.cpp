#include "decorate/prompts.hpp"

#include <json.hpp>

#include "decorate/assets.hpp"
#include "decorate/errors.hpp"

namespace decorate {
namespace prompts {

namespace {

std::string_view asset(std::string_view name) {
  const auto text = assets::embedded(name);
  if (text.empty()) raise(Errc::IoFailure, "missing embedded prompt " + std::string(name));
  return text;
}

}  // namespace

std::string_view rating_template() { return asset("rating.txt"); }

std::string_view criterion_clause(Criterion c) {
  switch (c) {
    case Criterion::EducationalValue: return asset("criterion_educational_value.txt");
    case Criterion::Expertise: return asset("criterion_expertise.txt");
    case Criterion::FactAndTrivia: return asset("criterion_fact_and_trivia.txt");
    case Criterion::ReasoningLevel: return asset("criterion_reasoning_level.txt");
    case Criterion::Scarcity: return asset("criterion_scarcity.txt");
    case Criterion::StructuralFormat: return asset("criterion_structural_format.txt");
    case Criterion::StoryLikeness: return asset("criterion_story_likeness.txt");
    case Criterion::Subjectivity: return asset("criterion_subjectivity.txt");
  }
  raise(Errc::InvalidArgument, "unknown criterion");
}

std::string_view summary_template() { return asset("summary.txt"); }
std::string_view first_level_template() { return asset("first_level_tagging.txt"); }
std::string_view sub_level_template() { return asset("sub_level_tagging.txt"); }
std::string_view editing_template() { return asset("editing.txt"); }
std::string_view structural_format_generation_template() { return asset("generate_structural_format.txt"); }

std::string render(std::string_view tmpl, const Values& values) {
  std::string out;
  out.reserve(tmpl.size());
  for (std::size_t i = 0; i < tmpl.size();) {
    const char ch = tmpl[i];
    if (ch == '{' && i + 1 < tmpl.size() && tmpl[i + 1] == '{') {
      out.push_back('{');
      i += 2;
    } else if (ch == '}' && i + 1 < tmpl.size() && tmpl[i + 1] == '}') {
      out.push_back('}');
      i += 2;
    } else if (ch == '{') {
      const auto close = tmpl.find('}', i);
      if (close == std::string_view::npos) raise(Errc::InvalidArgument, "unterminated placeholder in template");
      const auto name = tmpl.substr(i + 1, close - i - 1);
      auto it = values.find(name);
      if (it == values.end()) raise(Errc::InvalidArgument, "no value for placeholder {" + std::string(name) + "}");
      out += it->second;
      i = close + 1;
    } else {
      out.push_back(ch);
      ++i;
    }
  }
  return out;
}

std::string render_compare(Criterion c, std::string_view text_1, std::string_view text_2) {
  return render(rating_template(), {{"criterion", std::string(criterion_clause(c))},
                                    {"text_1", std::string(text_1)},
                                    {"text_2", std::string(text_2)}});
}

std::string render_summary(std::string_view text) {
  return render(summary_template(), {{"instance", std::string(text)}});
}

std::string render_first_level(std::string_view text) {
  return render(first_level_template(), {{"instance", std::string(text)}});
}

std::string render_sub_level(std::string_view first_level_tag, std::string_view tag_tree, std::string_view text) {
  return render(sub_level_template(), {{"first_level_tag", std::string(first_level_tag)},
                                       {"tag_tree", std::string(tag_tree)},
                                       {"instance", std::string(text)}});
}

std::string render_edit(std::string_view text) {
  std::string out(editing_template());
  out += '\n';
  out += text;
  return out;
}

std::string subtree_json(const TaxonomyNode& level1) {
  nlohmann::ordered_json tree = nlohmann::ordered_json::object();
  for (const auto& l2 : level1.children) {
    auto leaves = nlohmann::ordered_json::array();
    for (const auto& l3 : l2.children) leaves.push_back(l3.name);
    tree[l2.name] = std::move(leaves);
  }
  return tree.dump();
}

}  // namespace prompts
}  // namespace decorate
