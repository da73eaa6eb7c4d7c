// core/include/apa/text_util.h

// Copyright 2026  The apa-toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef APA_TEXT_UTIL_H_
#define APA_TEXT_UTIL_H_

#include <string>
#include <string_view>
#include <vector>

namespace apa {

std::string_view Trim(std::string_view s);
std::string ToLower(std::string_view s);
std::vector<std::string> Split(std::string_view s, char sep);
// Splits on runs of ASCII whitespace, dropping empty pieces.
std::vector<std::string> SplitWhitespace(std::string_view s);
std::string Join(const std::vector<std::string> &parts, std::string_view sep);

// Fixed-point rendering with `decimals` places; never prints "-0.0".
std::string FormatFixed(double v, int decimals);

// Lower-cased with leading/trailing punctuation removed; used to compare
// word tokens irrespective of casing.
std::string NormalizeToken(std::string_view token);

}  // namespace apa

#endif  // APA_TEXT_UTIL_H_
