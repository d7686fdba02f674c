# Strategy, execution, reports and parameter search
