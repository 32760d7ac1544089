public class Grade {
    static String grade(int score) {
        System.out.println("grading " + score);
        if (score >= 90) {
            return "A";
        } else if (score >= 75) {
            return "B";
        } else {
            return "C";
        }
    }

    public static void main(String[] args) {
        for (int s : new int[] {95, 80, 10}) {
            System.out.println(grade(s));
        }
    }
}
