#include "tinypy/grammar.hpp"

namespace tinypy {

// The built-in grammar in the grammar-file format (see parse_grammar).
// `expression_identifier` and `display_identifier` are hooks the derivation
// engine resolves against the variables in scope; `final` is the computed
// for-loop bound step * execution_count + initial - 1, which makes every
// generated loop run exactly execution_count times. The `while` token is
// defined for completeness but referenced by no rule.
static const char kBuiltinGrammar[] = R"GRAMMAR(@start all
@hook expression_identifier
@hook display_identifier
@computed final

# Basic tokens
<variable> ::= a | b | c | d | e | f | g | h | i | j | k | l | m
             | n | o | p | q | r | s | t | u | v | w | x | y | z
<digit> ::= 0 | 1 | 2 | 3 | 4 | 5 | 6 | 7 | 8 | 9

<arithmetic_operator> ::= + | - | * | /
<relational_operator> ::= < | > | <= | >= | != | ==
<logical_operator_infix> ::= and | or
<logical_operator_prefix> ::= not

<new_line> ::= \n
<tab_indent> ::= \t
<bracket_open> ::= (
<bracket_close> ::= )
<equals> ::= =
<colon> ::= :
<comma> ::= ,
<if> ::= if
<elif> ::= elif
<else> ::= else
<for> ::= for
<in> ::= in
<range> ::= range
<while> ::= while
<print> ::= print

# Expressions and assignments
<term> ::= <expression_identifier> | <digit>
<expression> ::= <term> \s <arithmetic_operator> \s <term>
<enclosed_expression> ::= <bracket_open> <expression> <bracket_close>
<display_expression> ::= <expression_identifier> \s <arithmetic_operator> \s <expression_identifier>
                       | <expression_identifier> \s <arithmetic_operator> \s <digit>
<identifier_initialization> ::= <identifier_initialization> <initialization> | <initialization>
<initialization> ::= <variable> \s <equals> \s <digit> <new_line>

<simple_assignments> ::= <variable> \s <equals> \s <expression> <new_line> | ""
<advanced_assignments> ::= <variable> \s <equals> \s <simple_arithmetic_evaluation> <new_line>
                         | <variable> \s <equals> \s <expression> <new_line>
                         | ""
<simple_arithmetic_evaluation> ::= <simple_arithmetic_evaluation> <arithmetic_operator> <enclosed_expression>
                                 | <enclosed_expression>

# Conditionals
<simple_if_statement> ::= <if> \s <condition> \s <colon> <new_line>
<advanced_if_statement> ::= <if> \s <chain_condition> \s <colon> <new_line>
<simple_elif_statement> ::= <elif> \s <condition> \s <colon> <new_line>
<advanced_elif_statement> ::= <elif> \s <chain_condition> \s <colon> <new_line>
<else_statement> ::= <else> \s <colon> <new_line>

<chain_condition> ::= <chain_condition> \s <logical_operator_infix> \s <enclosed_condition>
                    | <logical_operator_prefix> \s <enclosed_condition>
                    | <enclosed_condition>
<enclosed_condition> ::= <bracket_open> <condition> <bracket_close>
<condition> ::= <optional_not> <condition_expression> | <condition_expression>
<condition_expression> ::= <expression_identifier> \s <relational_operator> \s <expression_identifier>
                         | <expression_identifier> \s <relational_operator> \s <digit>
<optional_not> ::= <logical_operator_prefix> \s | \s

# Loops
<for_header> ::= <for> \s <expression_identifier> \s <in> \s <range> <bracket_open> <initial> <comma> \s <final> <comma> \s <step> <bracket_close> \s <colon>
               | <for> \s <expression_identifier> \s <in> \s <range> <bracket_open> <initial> <comma> \s <final> <bracket_close> \s <colon>
<initial> ::= <digit>
<step> ::= 1 | 2 | 3
<execution_count> ::= 2 | 3
<for_loop> ::= <for_header> <new_line> <tab_indent> <display>
<advanced_for_loop> ::= <for_loop> | <for_header> <new_line> <tab_indent> <advanced_display>

# Display
<display> ::= <print> <bracket_open> <display_identifier> <bracket_close>
<advanced_display> ::= <display> | <print> <bracket_open> <display_expression> <bracket_close>

# Complexity levels
<level1.1> ::= <identifier_initialization> <simple_assignments> <advanced_display>
<level1.2> ::= <identifier_initialization> <advanced_assignments> <advanced_display>
<level2.1> ::= <identifier_initialization> <simple_if_statement> <tab_indent> <display>
             | <identifier_initialization> <simple_if_statement> <tab_indent> <display> <new_line> <simple_elif_statement> <tab_indent> <display> <new_line> <else_statement> <tab_indent> <display>
             | <identifier_initialization> <simple_if_statement> <tab_indent> <display> <new_line> <else_statement> <tab_indent> <display>
<level2.2> ::= <identifier_initialization> <advanced_assignments> <advanced_if_statement> <tab_indent> <advanced_display>
             | <identifier_initialization> <advanced_assignments> <advanced_if_statement> <tab_indent> <advanced_display> <new_line> <advanced_elif_statement> <tab_indent> <advanced_display> <new_line> <else_statement> <tab_indent> <advanced_display>
             | <identifier_initialization> <advanced_assignments> <advanced_if_statement> <tab_indent> <advanced_display> <new_line> <else_statement> <tab_indent> <advanced_display>
<level3.1> ::= <identifier_initialization> <for_loop>
<level3.2> ::= <identifier_initialization> <advanced_assignments> <advanced_for_loop>

<all> ::= <level1.1> | <level1.2> | <level2.1> | <level2.2> | <level3.1> | <level3.2>
)GRAMMAR";

std::string_view builtin_tinypy_text() { return kBuiltinGrammar; }

}  // namespace tinypy
