#pragma once

#include <map>
#include <string>
#include <string_view>

#include "decorate/core_types.hpp"
#include "decorate/taxonomy.hpp"

namespace decorate::prompts {

// Raw templates with {placeholder} fields. "{{" and "}}" are literal braces.
std::string_view rating_template();
std::string_view criterion_clause(Criterion c);
std::string_view summary_template();
std::string_view first_level_template();
std::string_view sub_level_template();
std::string_view editing_template();
// Kept for reference; there is no pipeline stage built on it.
std::string_view structural_format_generation_template();

using Values = std::map<std::string, std::string, std::less<>>;

// Substitutes every {name}; values are inserted verbatim. Throws
// InvalidArgument for an unknown or unterminated placeholder.
std::string render(std::string_view tmpl, const Values& values);

std::string render_compare(Criterion c, std::string_view text_1, std::string_view text_2);
std::string render_summary(std::string_view text);
std::string render_first_level(std::string_view text);
// tag_tree is the JSON rendering of the first-level subtree.
std::string render_sub_level(std::string_view first_level_tag, std::string_view tag_tree, std::string_view text);
// The editing template ends with "text:"; the passage follows on the next line.
std::string render_edit(std::string_view text);

// {"Second Level": ["Third", ...], ...} for one first-level node.
std::string subtree_json(const TaxonomyNode& level1);

}  // namespace decorate::prompts
