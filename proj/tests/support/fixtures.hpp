#pragma once

#include <string>

namespace fixtures {

// The two annotated Microban levels shown alongside the annotation format.
inline const std::string kFigureLeft =
    "########\n"
    "##----##\n"
    "##.-..##\n"
    "###$-@-#\n"
    "#-$--$-#\n"
    "#---####\n"
    "########";

inline const std::string kFigureRight =
    "#########\n"
    "#---#####\n"
    "#---#---#\n"
    "##-$*@--#\n"
    "##-*.--##\n"
    "##--#####\n"
    "#########";

inline const std::string kOnePush =
    "#####\n"
    "#@$.#\n"
    "#####";

inline const std::string kWalkThenPush =
    "######\n"
    "#@-$.#\n"
    "######";

// The only box sits in a non-goal corner.
inline const std::string kCornerDeadlock =
    "######\n"
    "#$---#\n"
    "#-@-.#\n"
    "######";

}  // namespace fixtures
