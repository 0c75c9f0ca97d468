#pragma once

#include <array>
#include <string_view>
#include <utility>

namespace kgr {

/// Alzheimer's disease concepts whose triples always survive filtering.
inline constexpr std::array<std::pair<std::string_view, std::string_view>, 14> kAdWhitelist = {{
    {"C0750901", "Alzheimer Disease, Early Onset"},
    {"C0494463", "Alzheimer Disease, Late Onset"},
    {"C0338450", "Focal Alzheimer's disease"},
    {"C0276496", "Familial Alzheimer's disease"},
    {"C1979617", "Alzheimer's disease treatment"},
    {"C0051532", "Alzheimer's disease antigen"},
    {"C0002395", "Alzheimer's Disease"},
    {"C1853360", "Alzheimer Disease 11"},
    {"C1970144", "Alzheimer Disease 14"},
    {"C2677888", "Alzheimer Disease 16"},
    {"C1853555", "Alzheimer Disease 7"},
    {"C1846735", "Alzheimer Disease 8"},
    {"C1843013", "Alzheimer disease, familial, type 3"},
    {"C0949574", "Alzheimer Vaccines"},
}};

/// Generic UMLS semantic types dropped before scoring, grouped by semantic
/// group (Activities & Behaviors, Concepts & Ideas, Objects, Occupations,
/// Organizations, Phenomena). Food and Substance stay so that dietary
/// supplement candidates survive.
inline constexpr std::array<std::pair<std::string_view, std::string_view>, 36> kExcludedSemtypes = {{
    {"acty", "Activity"},
    {"bhvr", "Behavior"},
    {"dora", "Daily or Recreational Activity"},
    {"evnt", "Event"},
    {"gora", "Governmental or Regulatory Activity"},
    {"inbe", "Individual Behavior"},
    {"mcha", "Machine Activity"},
    {"ocac", "Occupational Activity"},
    {"socb", "Social Behavior"},
    {"clas", "Classification"},
    {"cnce", "Conceptual Entity"},
    {"ftcn", "Functional Concept"},
    {"grpa", "Group Attribute"},
    {"idcn", "Idea or Concept"},
    {"inpr", "Intellectual Product"},
    {"lang", "Language"},
    {"qlco", "Qualitative Concept"},
    {"qnco", "Quantitative Concept"},
    {"rnlw", "Regulation or Law"},
    {"spco", "Spatial Concept"},
    {"tmco", "Temporal Concept"},
    {"enty", "Entity"},
    {"mnob", "Manufactured Object"},
    {"phob", "Physical Object"},
    {"bmod", "Biomedical Occupation or Discipline"},
    {"ocdi", "Occupation or Discipline"},
    {"hcro", "Health Care Related Organization"},
    {"orgt", "Organization"},
    {"pros", "Professional Society"},
    {"shro", "Self-help or Relief Organization"},
    {"biof", "Biologic Function"},
    {"eehu", "Environmental Effect of Humans"},
    {"hcpp", "Human-caused Phenomenon or Process"},
    {"lbtr", "Laboratory or Test Result"},
    {"npop", "Natural Phenomenon or Process"},
    {"phpr", "Phenomenon or Process"},
}};

}  // namespace kgr
