// Copyright 2026 The gomoku-zero Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <vector>

#include "gomoku/game.hpp"

namespace gomoku {

// One position from a self-play game: network input, the search visit
// distribution over cells, and the final result for the player to move.
struct TrainingSample {
  EncodedState planes;
  std::vector<float> pi;
  float z = 0.0f;
};

}  // namespace gomoku
