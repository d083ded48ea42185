#pragma once

#include <iosfwd>
#include <string>

#include "quesim/gru.hpp"
#include "quesim/secondary.hpp"

namespace quesim {

// All model files share one container: the magic string "QSIM1", a kind tag
// ("gru", "rf", "ada", "svm"), a structured-text config block, then
// kind-specific payload. Numbers are little-endian; floats are 64-bit IEEE.

inline constexpr const char* kCheckpointMagic = "QSIM1";

void save_gru(std::ostream& out, const SiameseModel& model);
SiameseModel load_gru(std::istream& in);
void save_gru_file(const std::string& path, const SiameseModel& model);
SiameseModel load_gru_file(const std::string& path);

enum class ClassifierKind { kRandomForest, kAdaBoost, kSvm };

const char* classifier_kind_name(ClassifierKind kind);
ClassifierKind classifier_kind_from_name(const std::string& name);

// One of the three secondary classifiers behind a single file format.
struct SecondaryModel {
  ClassifierKind kind = ClassifierKind::kRandomForest;
  RandomForest forest;
  AdaBoostModel ada;
  SvmModel svm;

  double predict(const FeatureRow& row) const;
};

void save_secondary(std::ostream& out, const SecondaryModel& model);
SecondaryModel load_secondary(std::istream& in);
void save_secondary_file(const std::string& path, const SecondaryModel& model);
SecondaryModel load_secondary_file(const std::string& path);

}  // namespace quesim
